//! Chapters of the guide, compiled so that their examples run as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}
#[doc = include_str!("../../../book/src/truth-degrees.md")]
mod truth_degrees {}
#[doc = include_str!("../../../book/src/programs.md")]
mod programs {}
#[doc = include_str!("../../../book/src/minimal-models.md")]
mod minimal_models {}
#[doc = include_str!("../../../book/src/existential-rules.md")]
mod existential_rules {}
#[doc = include_str!("../../../book/src/termination.md")]
mod termination {}
#[doc = include_str!("../../../book/src/queries.md")]
mod queries {}
#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}
