//! Prompt construction, generation providers and batched workload production.

mod live;
mod mock;
mod orchestrate;
mod prompt;
mod provider;
mod request;

pub use live::LiveProvider;
pub use mock::MockProvider;
pub use orchestrate::{
    expand_with, expand_workload, generate_with, generate_with_options, generate_workload, GenerateOptions,
    GenerationResult, Rejection,
};
pub use prompt::build_prompt;
pub use provider::{provider_from_profile, Provider, ProviderCall, ProviderKind, ProviderProfile};
pub use request::{GenerationRequest, Intent, PredicateKind, SelectivityLevel, SelectivityTarget, StatsStrategy};
