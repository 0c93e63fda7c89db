//! Detection of quote dislocations between the SIP and direct exchange feeds,
//! realized opportunity cost of trades printed during them, and a latency
//! simulator that produces feed files with known ground truth.

pub mod book;
pub mod detect;
pub mod error;
pub mod feed;
pub mod model;
pub mod pipeline;
pub mod roc;
pub mod sim;
pub mod stats;

pub use book::{ConsolidatedBBO, SymbolBook};
pub use detect::{Conditioning, Detector, DislocationSegment, FeedOrder, Side};
pub use error::{DetectError, FeedError, ModelError, ParseError, PipelineError, SimError};
pub use model::{Category, ExchangeId, FeedEvent, Payload, Price, Quote, Source, Symbol, SymbolMeta, Timestamp, TradeMsg};
pub use pipeline::{run_events, run_files, Engine, PipelineOptions, PipelineOutput};
pub use roc::{Money, PurseReport, PurseRow, RocRecord};
