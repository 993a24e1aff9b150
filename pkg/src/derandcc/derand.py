"""Method-of-conditional-expectations engine.

Fixes seed bits (or blocks of bits) one step at a time against a pluggable
estimator.  All values are exact rationals; the engine asserts the
averaging law at every step, so a buggy estimator fails loudly instead of
silently breaking the final-value guarantee.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InfeasibilityError, ParameterError
from .hashfam import SeedAssignment

MAXIMIZE = "maximize"
MINIMIZE = "minimize"


@dataclass
class Estimator:
    direction: str
    evaluate: callable  # SeedAssignment -> Fraction
    threshold: Fraction = None  # feasibility gate on the unconditioned value

    def __post_init__(self):
        if self.direction not in (MAXIMIZE, MINIMIZE):
            raise ParameterError(f"unknown direction {self.direction!r}")

    def better(self, a, b):
        return a > b if self.direction == MAXIMIZE else a < b


@dataclass
class DerandStep:
    step: int
    candidate_values: list
    chosen: int

    def to_dict(self):
        return {
            "step": self.step,
            "candidate_values": [f"{v.numerator}/{v.denominator}" for v in self.candidate_values],
            "chosen": self.chosen,
        }


@dataclass
class DerandRun:
    schedule: str
    seed: SeedAssignment
    trace: list = field(default_factory=list)
    initial_value: Fraction = None
    final_value: Fraction = None

    def trace_dicts(self):
        return [s.to_dict() for s in self.trace]


def _fix_step(est, assignment, width, parent_value=None, check_averaging=True):
    """Evaluate all 2^width extensions and keep the best one.

    Ties break toward the smallest candidate value.  Returns
    (new assignment, candidate values, chosen candidate).
    """
    if assignment.complete:
        raise ParameterError("assignment already complete")
    width = min(width, assignment.free_bits)
    values = [est.evaluate(assignment.extend(c, width)) for c in range(1 << width)]
    if check_averaging and parent_value is not None:
        mean = sum(values, Fraction(0)) / len(values)
        if mean != parent_value:
            raise AssertionError(
                f"averaging law violated: parent {parent_value} != mean {mean}")
    best = 0
    for c in range(1, len(values)):
        if est.better(values[c], values[best]):
            best = c
    return assignment.extend(best, width), values, best


def fix_next_bit(est, assignment, parent_value=None):
    new, _, _ = _fix_step(est, assignment, 1, parent_value)
    return new


def fix_next_block(est, assignment, z, parent_value=None):
    if z < 1:
        raise ParameterError("block size must be >= 1")
    new, _, _ = _fix_step(est, assignment, z, parent_value)
    return new


def run_to_completion(est, params, schedule="bitwise", block_size=1, on_step=None,
                      start=None):
    """Fix a full seed, returning the run with its trace.

    `on_step(step_index, assignment_before, values, chosen, width)` lets the
    caller charge communication for each step.  The final value is
    guaranteed >= (maximize) / <= (minimize) the unconditioned value.
    """
    assignment = start if start is not None else SeedAssignment(params)
    value = est.evaluate(assignment)
    run = DerandRun(schedule=schedule, seed=assignment, initial_value=value)
    if est.threshold is not None:
        feasible = value < est.threshold if est.direction == MINIMIZE \
            else value > est.threshold
        if not feasible:
            raise InfeasibilityError(value)
    width = block_size if schedule == "blockwise" else 1
    step = 0
    while not assignment.complete:
        w = min(width, assignment.free_bits)
        before = assignment
        assignment, values, chosen = _fix_step(est, assignment, w, value)
        chosen_value = values[chosen]
        if est.direction == MAXIMIZE:
            assert chosen_value >= value, "trace not monotone"
        else:
            assert chosen_value <= value, "trace not monotone"
        value = chosen_value
        run.trace.append(DerandStep(step, values, chosen))
        if on_step is not None:
            on_step(step, before, values, chosen, w)
        step += 1
    run.seed = assignment
    run.final_value = value
    return run
