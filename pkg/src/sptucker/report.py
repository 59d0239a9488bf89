"""JSON run reports written by the command-line tools."""
import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources

# Fields that vary between otherwise identical runs.
TIMING_FIELDS = ("timings", "wall_time_s")


@dataclass
class RunReport:
    """Self-describing record of one decomposition run.

    ``input`` names the data source (a path or a generator recipe) and
    ``config`` echoes every setting needed to rerun it.
    """
    command: str
    input: dict
    config: dict
    shape: list
    nnz: int
    iterations: int
    converged: bool
    fits: list
    rel_error: float
    kron_calls: int
    kron_evaluations: int
    qrp_calls: int
    compression_ratio: float
    core_compression_ratio: float
    peak_memory_bytes: int
    timings: dict = field(default_factory=dict)
    wall_time_s: float = 0.0
    outputs: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def to_json(self, indent=2):
        # repr-precision floats, so loads(dumps(x)) is exact
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data):
        return cls(**data)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def without_timings(self):
        d = self.to_dict()
        for key in TIMING_FIELDS:
            d.pop(key, None)
        return d


def load_schema():
    text = resources.files("sptucker").joinpath("schemas/run_report.schema.json").read_text()
    return json.loads(text)


def estimate_peak_memory(shape, ranks, nnz):
    """Rough upper bound, in bytes, on the float64/int64 working set of one sweep.

    Counts the COO arrays, the largest ``Y_(n)``, one Kronecker row per
    nonzero for the widest mode, the factors and the core.
    """
    order = len(shape)
    widths = [math.prod(ranks) // ranks[n] for n in range(order)]
    coo = nnz * (order + 1)
    y = max(shape[n] * widths[n] for n in range(order))
    kron = nnz * max(widths) if order >= 3 else 0
    factors = sum(i * r for i, r in zip(shape, ranks))
    return 8 * (coo + y + kron + factors + math.prod(ranks))
