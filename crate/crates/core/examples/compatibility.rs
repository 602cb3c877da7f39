//! Compatible systems: dual pairs, drained queues, crossed queues.
//!
//! cargo run --example compatibility

use toast::cli::SpecFile;
use toast::semantics::compatible;

fn main() {
    let doc = SpecFile::parse(include_str!("../fixtures/compat.toast")).unwrap();
    for name in ["Pair", "Drained", "Crossed"] {
        let sys = doc.system(name).unwrap();
        let rep = compatible(&sys);
        println!("{name:8} {sys}");
        println!("{:8} compatible: {} {}", "", rep.compatible, rep.reason.unwrap_or_default());
    }
}
