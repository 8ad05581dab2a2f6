"""Schedule descriptors and portable scalar kernel generation.

A ScheduleDescriptor is the JSON wire format (schema "v1") tying together
the problem, the chosen tile and loop order, the analytic IO accounting,
and the roofline throughput prediction. Serialization is canonical
(sorted keys, fixed separators), so emit -> parse -> re-emit is
byte-identical.

Kernel generation produces a single self-contained C translation unit
realizing the blocked loop nest with a scalar rank-1 microkernel: three
block loops in schedule order, three clamped intra-block loops, and the
update C[i][j] += A[i][k] * B[k][j]. No intrinsics, no external
dependencies; any positive runtime dims are valid. Generated functions
follow the mema_outer_<m>x<k>x<n> naming convention.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .hardware import HardwareSpec, attainable_throughput
from .io_model import InnerClass, IOReport, LoopOrder, MMProblem, Schedule
from .tiling import TileShape

SCHEMA_VERSION = "v1"

ELEMENT_TYPES = ("f32", "i16-q15-scalar")


@dataclass(frozen=True)
class LoopSpec:
    """One loop: dimension name, iteration bound, and step."""

    dim: str
    bound: int
    step: int

    def __post_init__(self) -> None:
        if self.dim not in ("M", "K", "N"):
            raise ValueError(f"loop dim must be M, K or N, got {self.dim!r}")
        if self.bound < 1 or self.step < 1:
            raise ValueError("loop bound and step must be >= 1")


@dataclass(frozen=True)
class KernelIR:
    """Blocked-MM loop nest: three block loops then three intra-block loops.

    The body is always the rank-1 update C[i][j] += A[i][k] * B[k][j];
    intra-block extents are clamped against the block loop bounds when the
    nest is executed or printed, so ragged edges need no special casing.
    """

    loops: tuple[LoopSpec, ...]

    def __post_init__(self) -> None:
        if len(self.loops) != 6:
            raise ValueError("kernel IR must have exactly 6 loops (3 block + 3 intra)")
        block_dims = sorted(l.dim for l in self.loops[:3])
        intra_dims = sorted(l.dim for l in self.loops[3:])
        if block_dims != ["K", "M", "N"] or intra_dims != ["K", "M", "N"]:
            raise ValueError("block and intra loops must each cover M, K and N once")
        for blk in self.loops[:3]:
            intra = next(l for l in self.loops[3:] if l.dim == blk.dim)
            if intra.bound != blk.step or intra.step != 1:
                raise ValueError(
                    f"intra loop over {blk.dim} must have bound == block step and step 1")


def build_kernel_ir(problem: MMProblem, schedule: Schedule) -> KernelIR:
    """Concrete loop nest for one problem: block loops in schedule order."""
    t = schedule.tile
    bounds = {"M": problem.M, "K": problem.K, "N": problem.N}
    steps = {"M": t.m, "K": t.k, "N": t.n}
    block = [LoopSpec(d, bounds[d], steps[d]) for d in schedule.order.dims]
    intra = [LoopSpec(d, steps[d], 1) for d in ("K", "N", "M")]
    return KernelIR(loops=tuple(block + intra))


@dataclass(frozen=True)
class ScheduleDescriptor:
    """Flat, versioned record of a derived schedule; the "v1" JSON schema."""

    M: int
    K: int
    N: int
    element_bytes: int
    order: str
    m: int
    k: int
    n: int
    inner_class: str
    stationary: str
    streaming_elems: int
    stationary_elems: int
    total_io_elems: int
    total_io_bytes: int
    per_class_total_elems: dict[str, int] = field(default_factory=dict)
    predicted_throughput_macs_per_s: float = 0.0
    schema: str = SCHEMA_VERSION

    def to_json(self) -> str:
        payload = {
            "schema": self.schema,
            "M": self.M,
            "K": self.K,
            "N": self.N,
            "element_bytes": self.element_bytes,
            "order": self.order,
            "m": self.m,
            "k": self.k,
            "n": self.n,
            "inner_class": self.inner_class,
            "stationary": self.stationary,
            "streaming_elems": self.streaming_elems,
            "stationary_elems": self.stationary_elems,
            "total_io_elems": self.total_io_elems,
            "total_io_bytes": self.total_io_bytes,
            "per_class_total_elems": self.per_class_total_elems,
            "predicted_throughput_macs_per_s": self.predicted_throughput_macs_per_s,
        }
        return json.dumps(payload, indent=2, sort_keys=True, separators=(",", ": ")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ScheduleDescriptor":
        raw = json.loads(text)
        if not isinstance(raw, dict):
            raise ValueError("schedule descriptor must be a JSON object")
        schema = raw.get("schema")
        if schema != SCHEMA_VERSION:
            raise ValueError(f"unsupported descriptor schema {schema!r}")
        known = {
            "schema", "M", "K", "N", "element_bytes", "order", "m", "k", "n",
            "inner_class", "stationary", "streaming_elems", "stationary_elems",
            "total_io_elems", "total_io_bytes", "per_class_total_elems",
            "predicted_throughput_macs_per_s",
        }
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown descriptor keys: {sorted(unknown)}")
        missing = known - set(raw)
        if missing:
            raise ValueError(f"missing descriptor keys: {sorted(missing)}")
        return cls(
            M=int(raw["M"]), K=int(raw["K"]), N=int(raw["N"]),
            element_bytes=int(raw["element_bytes"]),
            order=str(raw["order"]),
            m=int(raw["m"]), k=int(raw["k"]), n=int(raw["n"]),
            inner_class=str(raw["inner_class"]),
            stationary=str(raw["stationary"]),
            streaming_elems=int(raw["streaming_elems"]),
            stationary_elems=int(raw["stationary_elems"]),
            total_io_elems=int(raw["total_io_elems"]),
            total_io_bytes=int(raw["total_io_bytes"]),
            per_class_total_elems={str(c): int(v) for c, v in raw["per_class_total_elems"].items()},
            predicted_throughput_macs_per_s=float(raw["predicted_throughput_macs_per_s"]),
        )

    def problem(self) -> MMProblem:
        return MMProblem(self.M, self.K, self.N, self.element_bytes)

    def schedule(self) -> Schedule:
        return Schedule(LoopOrder.parse(self.order), TileShape(self.m, self.k, self.n))


def emit_descriptor(problem: MMProblem, schedule: Schedule, io: IOReport,
                    hw: HardwareSpec,
                    per_class_totals: dict[InnerClass, int] | None = None,
                    ) -> ScheduleDescriptor:
    """Assemble the descriptor for one (problem, schedule, IO) outcome.

    The throughput prediction is the roofline ceiling at the schedule's
    achieved intensity, MKN MACs over the total external element traffic.
    """
    ai = problem.macs / io.total_elems
    per_class = {cls.value: total for cls, total in (per_class_totals or {}).items()}
    return ScheduleDescriptor(
        M=problem.M, K=problem.K, N=problem.N,
        element_bytes=problem.element_bytes,
        order=schedule.order.value,
        m=schedule.tile.m, k=schedule.tile.k, n=schedule.tile.n,
        inner_class=schedule.inner_class.value,
        stationary=schedule.stationary,
        streaming_elems=io.streaming_elems,
        stationary_elems=io.stationary_elems,
        total_io_elems=io.total_elems,
        total_io_bytes=io.total_bytes,
        per_class_total_elems=per_class,
        predicted_throughput_macs_per_s=attainable_throughput(hw, ai),
    )


def kernel_name(tile: TileShape, element_type: str = "f32") -> str:
    suffix = "" if element_type == "f32" else "_q15"
    return f"mema_outer_{tile.m}x{tile.k}x{tile.n}{suffix}"


_DIM_VARS = {"M": ("m0", "mb", "dim_m"), "K": ("k0", "kb", "dim_k"), "N": ("n0", "nb", "dim_n")}

_Q15_HELPER = """\
/* Q15 multiply-accumulate: round to nearest, saturate on overflow.
 * Experimental semantics; packed dual-MAC forms are out of scope. */
static inline int16_t mema_q15_mac(int16_t acc, int16_t x, int16_t y)
{
    int32_t prod = (int32_t)x * (int32_t)y;
    int32_t q15 = (prod + (1 << 14)) >> 15;
    int32_t sum = (int32_t)acc + q15;
    if (sum > 32767) { sum = 32767; }
    if (sum < -32768) { sum = -32768; }
    return (int16_t)sum;
}
"""


def emit_kernel_source(schedule: Schedule, element_type: str = "f32") -> str:
    """Generate the C source for one schedule; deterministic, byte for byte.

    The function signature is
        void <name>(const T *a, const T *b, T *c, int dim_m, int dim_k, int dim_n)
    with row-major operands, computing C += A * B for any positive dims.
    """
    if element_type not in ELEMENT_TYPES:
        raise ValueError(
            f"unsupported element type {element_type!r}; expected one of {ELEMENT_TYPES}")
    t = schedule.tile
    name = kernel_name(t, element_type)
    ctype = "float" if element_type == "f32" else "int16_t"
    order = schedule.order

    lines: list[str] = []
    out = lines.append
    out("/* Generated by memtile; do not edit.")
    out(" *")
    out(f" * {name}: blocked matrix multiply  C += A * B  (row-major)")
    out(f" *   A: dim_m x dim_k, B: dim_k x dim_n, C: dim_m x dim_n, element {ctype}.")
    out(f" *   Block schedule {order.value} ({order.inner_class.value}, "
        f"stationary {schedule.stationary} tiles), tile {t.key()}.")
    out(" *   Edge tiles are clamped; any positive dims are valid.")
    out(" */")
    out("#include <stdint.h>")
    out("#include <stddef.h>")
    out("")
    if element_type != "f32":
        out(_Q15_HELPER)
    out(f"void {name}(const {ctype} *a, const {ctype} *b, {ctype} *c,")
    out(f"{' ' * (6 + len(name))}int dim_m, int dim_k, int dim_n)")
    out("{")

    indent = "    "
    depth = 1
    step = {"M": t.m, "K": t.k, "N": t.n}
    for d in order.dims:
        base, extent, bound = _DIM_VARS[d]
        pad = indent * depth
        out(f"{pad}for (int {base} = 0; {base} < {bound}; {base} += {step[d]}) {{")
        out(f"{pad}{indent}int {extent} = ({bound} - {base} < {step[d]}) "
            f"? {bound} - {base} : {step[d]};")
        depth += 1
    pad = indent * depth
    out(f"{pad}for (int kk = 0; kk < kb; kk++) {{")
    out(f"{pad}{indent}for (int j = 0; j < nb; j++) {{")
    out(f"{pad}{indent * 2}for (int i = 0; i < mb; i++) {{")
    c_ref = "c[(size_t)(m0 + i) * dim_n + (n0 + j)]"
    a_ref = "a[(size_t)(m0 + i) * dim_k + (k0 + kk)]"
    b_ref = "b[(size_t)(k0 + kk) * dim_n + (n0 + j)]"
    body = indent * (depth + 3)
    if element_type == "f32":
        out(f"{body}{c_ref} +=")
        out(f"{body}{indent}{a_ref} * {b_ref};")
    else:
        out(f"{body}{c_ref} =")
        out(f"{body}{indent}mema_q15_mac({c_ref}, {a_ref}, {b_ref});")
    out(f"{pad}{indent * 2}}}")
    out(f"{pad}{indent}}}")
    out(f"{pad}}}")
    for level in range(depth - 1, 0, -1):
        out(f"{indent * level}}}")
    out("}")
    return "\n".join(lines) + "\n"
