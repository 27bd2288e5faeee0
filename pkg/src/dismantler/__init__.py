"""Node-importance scoring and network dismantling toolkit."""

from dismantler.centrality import (
    betweenness,
    closeness,
    collective_influence,
    degree,
    eigenvector,
    harmonic,
    pagerank,
)
from dismantler.dismantle import (
    DismantleReport,
    minimal_prefix_tas,
    ngcc_curve_and_auc,
    random_scores,
    rank_nodes,
    threshold_sweep,
)
from dismantler.graph import (
    EdgeListError,
    Graph,
    UnionFind,
    gcc_size,
    generate_ba,
    generate_er,
    generate_plc,
    generate_ws,
    load_edge_list,
    remove_nodes,
    save_edge_list,
    validate_graph,
)
from dismantler.model import DcrsConfig, DcrsOutput, dismantling_loss, run_dcrs, train
from dismantler.roles import (
    FeatureMatrix,
    RoleGraph,
    RoleModel,
    build_role_graph,
    discover_role_graph,
    egonet_features,
    nmf,
    recursive_aggregate,
    role_similarity,
    select_rank_mdl,
)

__all__ = [
    "DcrsConfig",
    "DcrsOutput",
    "DismantleReport",
    "EdgeListError",
    "FeatureMatrix",
    "Graph",
    "RoleGraph",
    "RoleModel",
    "UnionFind",
    "betweenness",
    "build_role_graph",
    "closeness",
    "collective_influence",
    "degree",
    "discover_role_graph",
    "dismantling_loss",
    "egonet_features",
    "eigenvector",
    "gcc_size",
    "generate_ba",
    "generate_er",
    "generate_plc",
    "generate_ws",
    "harmonic",
    "load_edge_list",
    "minimal_prefix_tas",
    "ngcc_curve_and_auc",
    "nmf",
    "pagerank",
    "random_scores",
    "rank_nodes",
    "recursive_aggregate",
    "remove_nodes",
    "role_similarity",
    "run_dcrs",
    "save_edge_list",
    "select_rank_mdl",
    "threshold_sweep",
    "train",
    "validate_graph",
]
