//! Entanglement benchmarking on simulated superconducting devices.

pub mod analyze;
pub mod circuit;
pub mod embed;
pub mod mitigate;
pub mod protocol;
pub mod seed;
pub mod sim;
pub mod topology;

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/devices.md")]
    mod devices {}
    #[doc = include_str!("../../../book/src/ghz.md")]
    mod ghz {}
    #[doc = include_str!("../../../book/src/graph-states.md")]
    mod graph_states {}
    #[doc = include_str!("../../../book/src/mitigation.md")]
    mod mitigation {}
    #[doc = include_str!("../../../book/src/decay.md")]
    mod decay {}
    #[doc = include_str!("../../../book/src/records.md")]
    mod records {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
