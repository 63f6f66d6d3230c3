//! GNN mapping onto `V` execution lanes with buffer-and-partition scheduling.

mod graph;
mod mapper;
mod partition;
mod spec;

pub use graph::{parse_edge_list, EdgeLine, Graph};
pub use mapper::{
    aggregate, aggregation_coefficients, combine, dense_aggregation_matrix, run_gnn, run_gnn_with,
    update,
};
pub use partition::{partition_graph, PartitionSchedule, Round};
pub use spec::{Aggregator, GhostConfig, GhostSettings, GnnLayerSpec, GnnModelSpec};
