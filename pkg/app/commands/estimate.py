import argparse
import logging

from app.errors import ConfigError
from app.services.estimators import SIZE_METHODS, WALK_THINNING, estimate_size
from app.services.graph import largest_connected_component, load_edgelist
from app.services.snap_client import open_dataset
from app.settings import settings

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("estimate", help="estimate node and edge counts of one graph")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--graph", help="edgelist file")
    source.add_argument("--dataset", help="fetched SNAP dataset name")
    parser.add_argument("--data-dir", default=f"{settings.DATA_DIR}/snap")
    parser.add_argument("--method", choices=SIZE_METHODS, default="mh")
    parser.add_argument("--budget-fraction", type=float, default=0.20)
    parser.add_argument("--burn-in-fraction", type=float, default=0.10)
    parser.add_argument("--k-returns", type=int, default=10)
    parser.add_argument("--thinning", type=int, default=WALK_THINNING, help="walk steps per recorded position")
    parser.add_argument("--seed", type=int, default=settings.MASTER_SEED)
    parser.add_argument("--lcc", action="store_true", help="restrict to the largest component")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    if not 0 < args.budget_fraction <= 1 or not 0 < args.burn_in_fraction <= 1:
        raise ConfigError("fractions must lie in (0, 1]")
    if args.thinning < 1:
        raise ConfigError("thinning must be at least 1")
    if args.graph:
        with open(args.graph, "rb") as fh:
            g = load_edgelist(fh)
    else:
        g = open_dataset(args.dataset, args.data_dir)
    if args.lcc:
        g = largest_connected_component(g)

    result = estimate_size(
        g,
        args.method,
        args.budget_fraction,
        args.burn_in_fraction,
        args.seed,
        k_returns=args.k_returns,
        thinning=args.thinning,
    )
    result.diagnostics["true_nodes"] = g.node_count
    result.diagnostics["true_edges"] = g.edge_count
    print(result.model_dump_json(indent=2))
    return 0 if result.status == "ok" else 1
