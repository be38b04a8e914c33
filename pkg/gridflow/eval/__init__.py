from .ablations import ablate_cfg, ablate_steps, data_scale_sweep
from .baseline import random_walk_baseline
from .best_of_n import BestOfN, best_of_n, best_of_n_table
from .harness import REPORT_COLUMNS, attempt, evaluate, report_rows
from .tables import format_table, read_csv, write_csv

__all__ = [
    "evaluate",
    "attempt",
    "report_rows",
    "REPORT_COLUMNS",
    "best_of_n",
    "best_of_n_table",
    "BestOfN",
    "ablate_steps",
    "ablate_cfg",
    "data_scale_sweep",
    "random_walk_baseline",
    "write_csv",
    "read_csv",
    "format_table",
]
