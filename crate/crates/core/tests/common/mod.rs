#![allow(dead_code)]

use kltrace::distributivity::DistLaw;
use kltrace::syntax::parse_system;
use kltrace::system::{StateId, System};

pub const RUNNING_ND: &str = include_str!("../../../cli/corpus/running-nd.sys");
pub const RUNNING_PROB: &str = include_str!("../../../cli/corpus/running-prob.sys");
pub const PEANO_CFG: &str = include_str!("../../../cli/corpus/peano-cfg.sys");
pub const CLASSIC: &str = include_str!("../../../cli/corpus/classic.sys");
pub const LIFT_TRIO: &str = include_str!("../../../cli/corpus/lift-trio.sys");

pub const CORPUS: [&str; 5] = [RUNNING_ND, RUNNING_PROB, PEANO_CFG, CLASSIC, LIFT_TRIO];

pub fn load(text: &str) -> System {
    parse_system(text).expect("corpus file parses")
}

pub fn law(sys: &System) -> DistLaw {
    DistLaw::canonical(sys.tag(), sys.functor().clone()).unwrap()
}

pub fn id(sys: &System, name: &str) -> StateId {
    sys.state_id(name).unwrap()
}
