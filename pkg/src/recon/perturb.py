"""Resampling perturbation that enforces height and protection thresholds.

Each point owns an anchor (its original position) and an estimated tangent
disk; a *reset* redraws the point uniformly in that disk.  Bad events are
rho-small d-simplices with height below ``height_min`` and pairs (point,
simplex) whose projected clearance from the simplex's circumsphere (the
unsigned distance ``| ||q' - Z|| - R |``) is at most ``prot_min`` -- i.e.
near-cocircular configurations.  Points clearly inside a circumsphere are not
events: they merely disqualify that simplex, they do not make the local
Delaunay structure ambiguous.  The loop resets the points correlated to one
bad event at a time until none remain or the round budget runs out.
"""

from dataclasses import dataclass, field

import numpy as np

from .complexes import ball_small_simplices
from .errors import InvalidInput
from .geometry import affine_hull, circumsphere, miniball, simplex_height
from .manifolds import pca_tangent
from .utils import dumps_17g


@dataclass
class PerturbConfig:
    dim: int
    rho: float
    r_pert: float
    height_min: float
    prot_min: float
    max_rounds: int = 50
    seed: int = 0
    schedule: str = "worst"  # or "fifo"

    def __post_init__(self):
        if min(self.rho, self.r_pert) < 0 or self.max_rounds < 1:
            raise InvalidInput("rho, r_pert must be >= 0 and max_rounds >= 1")
        if self.r_pert > self.rho:
            raise InvalidInput("r_pert must not exceed rho")
        if self.schedule not in ("worst", "fifo"):
            raise InvalidInput("schedule must be 'worst' or 'fifo'")


@dataclass
class BadEvent:
    kind: str  # "height" or "protection"
    simplex: tuple
    witness: int | None
    violation: float  # positive magnitude of the threshold violation


def threshold_scale(rho, reach, constant):
    """The ``c * (rho/reach)^(1/3) * rho`` form for height/protection thresholds."""
    return constant * (rho / reach) ** (1.0 / 3.0) * rho


def reset(p_index, anchors, tangent_flats, config, rng):
    """Uniform draw in the anchor's tangent disk of radius ``r_pert``.

    Rejection sampling in the flat's coordinates; with ``r_pert == 0`` the
    anchor itself is returned.
    """
    flat = tangent_flats[p_index]
    if config.r_pert == 0.0:
        return anchors[p_index].copy()
    while True:
        u = rng.uniform(-config.r_pert, config.r_pert, size=flat.dim)
        if u @ u <= config.r_pert ** 2:
            return flat.from_coords(u)


def _sorted_events(events):
    events.sort(key=lambda e: (-e.violation, e.simplex, -1 if e.witness is None else e.witness))
    return events


def find_bad_events(cloud, config, d=None, candidate_budget=None, touched=None):
    """All current bad events, sorted by violation magnitude (largest first).

    With ``touched`` (indices of freshly reset points), only events whose
    correlated points include a touched point are reported: events are local,
    so simplices are enumerated within ``6 rho`` of the touched set.
    """
    cloud = np.asarray(cloud, dtype=float)
    d = config.dim if d is None else d
    if touched is not None:
        touched = set(int(i) for i in touched)
        reach2 = (6.0 * config.rho) ** 2 * (1.0 + 1e-9)
        moved = cloud[sorted(touched)]
        d2 = ((cloud[:, None, :] - moved[None, :, :]) ** 2).sum(-1)
        pool = np.nonzero(d2.min(axis=1) <= reach2)[0]
    else:
        pool = np.arange(len(cloud))

    def involves_touched(simplex, witness=None):
        if touched is None:
            return True
        if any(v in touched for v in simplex):
            return True
        return witness is not None and witness in touched

    def candidates(radius):
        local = ball_small_simplices(cloud[pool], radius, d,
                                     max_candidates=candidate_budget)
        return [tuple(int(pool[v]) for v in s) for s in local]

    events = []
    for sigma in candidates(config.rho):
        if not involves_touched(sigma):
            continue
        h = simplex_height(cloud[list(sigma)])
        if h < config.height_min:
            events.append(BadEvent("height", sigma, None, config.height_min - h))
    slack = 1e-12 * (1.0 + 3.0 * config.rho)
    for sigma in candidates(3.0 * config.rho):
        vertices = cloud[list(sigma)]
        try:
            flat = affine_hull(vertices, expected_dim=d)
            sph = circumsphere(vertices)
        except Exception:
            continue  # degenerate: already a height event
        center = miniball(vertices).center
        near = np.nonzero(((cloud - center) ** 2).sum(axis=1)
                          <= (3.0 * config.rho + slack) ** 2)[0]
        others = [i for i in near if i not in sigma]
        if not others:
            continue
        coords = flat.coords(cloud[others])
        zc = flat.coords(sph.center)
        clearance = np.abs(np.linalg.norm(coords - zc, axis=1) - sph.radius)
        for i, value in zip(others, clearance):
            if value <= config.prot_min and involves_touched(sigma, int(i)):
                events.append(
                    BadEvent("protection", sigma, int(i), config.prot_min - float(value))
                )
    return _sorted_events(events)


@dataclass
class PerturbResult:
    points: np.ndarray
    rounds: list = field(default_factory=list)
    status: str = "ok"  # or "timed-out"

    def trace_lines(self):
        """One JSON object per round: counts of events and resets."""
        return "\n".join(dumps_17g(r, indent=0).replace("\n", " ") for r in self.rounds)


def moser_tardos(anchors, config, candidate_budget=None):
    """Run the resampling loop; returns a :class:`PerturbResult`.

    Tangent disks are estimated once from the anchors at scale ``3 * rho``;
    every point is reset once up front; then the first bad event (worst or
    fifo per the schedule) has its correlated points reset, until no event
    remains.  Termination within ``max_rounds`` is empirical; running out is
    reported as status ``timed-out`` with the best cloud so far, not an error.
    """
    anchors = np.asarray(anchors, dtype=float)
    d = config.dim
    rng = np.random.default_rng(config.seed)
    flats = [pca_tangent(anchors, i, 3.0 * config.rho, d) for i in range(len(anchors))]
    points = np.array(anchors, copy=True)
    for i in range(len(points)):
        points[i] = reset(i, anchors, flats, config, rng)

    rounds = []
    best = points.copy()
    best_count = None
    events = find_bad_events(points, config, d, candidate_budget=candidate_budget)
    for round_no in range(config.max_rounds):
        record = {
            "round": round_no,
            "events_height": sum(1 for e in events if e.kind == "height"),
            "events_protection": sum(1 for e in events if e.kind == "protection"),
            "resets": 0,
        }
        if best_count is None or len(events) < best_count:
            best, best_count = points.copy(), len(events)
        if not events:
            rounds.append(record)
            return PerturbResult(points=points, rounds=rounds, status="ok")
        if config.schedule == "worst":
            event = events[0]
        else:  # fifo: enumeration order
            event = min(events, key=lambda e: (e.simplex, -1 if e.witness is None else e.witness))
        correlated = sorted(set(
            list(event.simplex) + ([event.witness] if event.witness is not None else [])
        ))
        for i in correlated:
            points[i] = reset(i, anchors, flats, config, rng)
        record["resets"] = len(correlated)
        rounds.append(record)
        # incremental recheck: events are local to the reset points
        touched = set(correlated)
        kept = [
            e for e in events
            if not (set(e.simplex) | ({e.witness} if e.witness is not None else set()))
            & touched
        ]
        fresh = find_bad_events(points, config, d, candidate_budget=candidate_budget,
                                touched=touched)
        events = _sorted_events(kept + fresh)
    return PerturbResult(points=best, rounds=rounds, status="timed-out")
