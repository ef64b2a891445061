"""
Closed-form bounds on the extreme ratios

    phi = min ||T||_sigma / ||T||    and    psi = min ||T|| / ||T||_*

over a tensor space. Every evaluator returns a BoundReport listing each
applicable formula, so callers can print the derivation next to the result.
All logarithms are natural.
"""

import logging
import math
from functools import lru_cache
from itertools import product
from typing import Iterable, Optional, Sequence

from ..schemas.bounds import (
    BoundReport,
    FormulaTerm,
    MonoCheckReport,
    NumberField,
    OrderGapReport,
    SpaceSpec,
)
from .constructions import uit_condition
from .errors import ConditionError, ShapeMismatchError

logger = logging.getLogger(__name__)

# Known spectral/Frobenius extreme ratio of complex 2x2x2 tensors; a symmetric
# zero-one tensor attains it, so it is exact for nonnegative 2x2x2 spaces too.
COMPLEX_222_VALUE = 2.0 / 3.0
# Candidate counts above this skip the dimension-reduction search.
MONO_SEARCH_LIMIT = 20000


def _tall_value(shape: Sequence[int]) -> Optional[float]:
    """``prod(others) ** -1/2`` when the largest mode dominates the rest, else None."""
    j = max(range(len(shape)), key=lambda k: shape[k])
    rest = math.prod(shape) // shape[j]
    return rest ** -0.5 if shape[j] >= rest else None


def _orthogonal_lower(shape: Sequence[int]) -> float:
    total = math.prod(shape)
    return min(total // n for n in shape) ** -0.5


def _known_exact(shape: Sequence[int]) -> Optional[float]:
    """Exact nonnegative phi from the identity-tensor condition, tallness or 2x2x2."""
    if len(shape) == 1:
        return 1.0
    tall = _tall_value(shape)
    if tall is not None:
        return tall
    if uit_condition(shape):
        return math.prod(shape) ** -0.25
    if tuple(sorted(shape)) == (2, 2, 2):
        return COMPLEX_222_VALUE
    return None


@lru_cache(maxsize=1024)
def _mono_reduction(shape: tuple[int, ...]) -> Optional[tuple[float, tuple[int, ...]]]:
    """Smallest known exact value over componentwise-smaller shapes of the same order."""
    if math.prod(n - 1 for n in shape) > MONO_SEARCH_LIMIT:
        return None
    best = None
    for smaller in product(*(range(2, n + 1) for n in shape)):
        if smaller == shape:
            continue
        value = _known_exact(smaller)
        if value is not None and (best is None or value < best[0]):
            best = (value, smaller)
    return best


def _assemble(quantity: str, space: SpaceSpec, terms: list[FormulaTerm], conjectural: bool = False) -> BoundReport:
    exact_terms = [t for t in terms if t.role == "exact"]
    lower = max(t.value for t in terms if t.role in ("lower", "exact"))
    upper = min(t.value for t in terms if t.role in ("upper", "exact"))
    exact = None
    if exact_terms:
        exact = exact_terms[0].value
        lower = upper = exact
    return BoundReport(
        quantity=quantity,
        space=space,
        lower=lower,
        upper=upper,
        exact=exact,
        formulas=terms,
        conjectural=conjectural,
    )


def _nonneg_phi_terms(shape: tuple[int, ...]) -> list[FormulaTerm]:
    d = len(shape)
    total = math.prod(shape)
    terms = [
        FormulaTerm(name="trivial_upper", role="upper", value=1.0, note="the ratio never exceeds one"),
        FormulaTerm(
            name="identity_tensor_lower",
            role="lower",
            value=total ** -0.25,
            note="(prod n_k)^(-1/4), attained exactly when sqrt(prod n_k) is an integer divisible by every n_k",
        ),
    ]
    if d == 1:
        terms.append(FormulaTerm(name="vector", role="exact", value=1.0, note="every vector is rank one"))
        return terms
    tall = _tall_value(shape)
    if tall is not None:
        terms.append(
            FormulaTerm(
                name="tall_exact",
                role="exact",
                value=tall,
                note="largest dimension at least the product of the others: (prod of others)^(-1/2)",
            )
        )
    if uit_condition(shape):
        terms.append(
            FormulaTerm(
                name="identity_tensor_exact",
                role="exact",
                value=total ** -0.25,
                note="attained by an unfolded identity tensor",
            )
        )
    if tuple(sorted(shape)) == (2, 2, 2):
        terms.append(
            FormulaTerm(
                name="complex_222_lower",
                role="lower",
                value=COMPLEX_222_VALUE,
                note="the complex 2x2x2 value bounds every nonnegative 2x2x2 tensor from below",
            )
        )
        terms.append(
            FormulaTerm(
                name="zero_one_222_exact",
                role="exact",
                value=COMPLEX_222_VALUE,
                note="attained by the zero-one tensor with ones at (1,1,2), (1,2,1), (2,1,1)",
            )
        )
    if max(shape) <= math.sqrt(total):
        terms.append(
            FormulaTerm(
                name="power_of_two_upper",
                role="upper",
                value=2 ** ((d + 1) / 4) * total ** -0.25,
                note="2^((d+1)/4) (prod n_k)^(-1/4) for shapes that are not tall",
            )
        )
    largest = max(shape)
    rest = total // largest
    combined = min(largest, rest) * rest
    terms.append(
        FormulaTerm(
            name="largest_mode_lower",
            role="lower",
            value=combined ** -0.25,
            note="(min{n_max, prod of others} * prod of others)^(-1/4)",
        )
    )
    terms.append(
        FormulaTerm(
            name="largest_mode_upper",
            role="upper",
            value=2 ** ((d + 1) / 4) * combined ** -0.25,
            note="2^((d+1)/4) (min{n_max, prod of others} * prod of others)^(-1/4)",
        )
    )
    if len(set(shape)) == 1 and d % 2 == 1:
        n = shape[0]
        terms.append(
            FormulaTerm(
                name="odd_cube_square_upper",
                role="upper",
                value=(math.sqrt(n + 1) - 1) ** (-d / 2),
                note="shrink to the largest square dimension p^2 <= n",
            )
        )
        terms.append(
            FormulaTerm(
                name="odd_cube_order_upper",
                role="upper",
                value=n ** (-(d - 1) / 4),
                note="drop one mode to reach an even order",
            )
        )
    reduced = _mono_reduction(shape)
    if reduced is not None:
        value, smaller = reduced
        terms.append(
            FormulaTerm(
                name="dimension_reduction_upper",
                role="upper",
                value=value,
                note=f"the ratio cannot increase with dimensions; exact for {'x'.join(map(str, smaller))}",
            )
        )
    return terms


def _signed_phi_terms(shape: tuple[int, ...], field: NumberField) -> list[FormulaTerm]:
    d = len(shape)
    lower = _orthogonal_lower(shape)
    terms = [
        FormulaTerm(name="trivial_upper", role="upper", value=1.0, note="the ratio never exceeds one"),
        FormulaTerm(
            name="orthogonal_lower",
            role="lower",
            value=lower,
            note="(min_j prod_{k != j} n_k)^(-1/2)",
        ),
    ]
    if d == 1:
        terms.append(FormulaTerm(name="vector", role="exact", value=1.0, note="every vector is rank one"))
        return terms
    if d == 2 or _tall_value(shape) is not None:
        terms.append(
            FormulaTerm(name="tall_exact", role="exact", value=lower, note="tall shapes (including matrices)")
        )
    if d >= 3:
        terms.append(
            FormulaTerm(
                name="random_tensor_upper",
                role="upper",
                value=32 * math.sqrt(d * math.log(d)) * lower,
                note="32 sqrt(d ln d) (min_j prod_{k != j} n_k)^(-1/2)",
            )
        )
    if field is NumberField.COMPLEX and tuple(sorted(shape)) == (2, 2, 2):
        terms.append(
            FormulaTerm(name="complex_222_exact", role="exact", value=COMPLEX_222_VALUE, note="known complex value")
        )
    nonneg = _assemble("phi", SpaceSpec(shape=shape, field=NumberField.NONNEG), _nonneg_phi_terms(shape))
    terms.append(
        FormulaTerm(
            name="nonnegative_inclusion_upper",
            role="upper",
            value=nonneg.upper,
            note="nonnegative tensors are a subset, so their upper bound carries over",
        )
    )
    return terms


def phi_bounds(space: SpaceSpec) -> BoundReport:
    """
    Lower/upper/exact values of the spectral/Frobenius extreme ratio.

    Symmetric spaces are delegated to :func:`phi_bounds_sym`. Zero-one
    spaces get the nonnegative values, flagged as conjectural.

    Raises:
        ShapeMismatchError: The space is symmetric but not cubical.
    """
    if space.symmetric:
        return phi_bounds_sym(space.shape[0], space.order, space.field)
    if space.field.is_nonnegative:
        report = _assemble(
            "phi", space, _nonneg_phi_terms(space.shape), conjectural=space.field is NumberField.BINARY
        )
    else:
        report = _assemble("phi", space, _signed_phi_terms(space.shape, space.field))
    logger.debug("phi bounds for %s: [%.6g, %.6g]", space.shape, report.lower, report.upper)
    return report


def phi_bounds_cube(n: int, d: int, field: NumberField = NumberField.NONNEG) -> BoundReport:
    """Bounds for the n×n×…×n space of order d."""
    if n < 2 or d < 1:
        raise ShapeMismatchError(f"cube bounds need n >= 2 and d >= 1, got n={n}, d={d}")
    return phi_bounds(SpaceSpec(shape=(n,) * d, field=NumberField(field)))


def _sym_nonneg_terms(n: int, d: int) -> list[FormulaTerm]:
    fact = math.factorial(d)
    root_fact = math.sqrt(fact)
    terms = [
        FormulaTerm(name="trivial_upper", role="upper", value=1.0, note="the ratio never exceeds one"),
        FormulaTerm(
            name="cube_lower",
            role="lower",
            value=n ** (-d / 4),
            note="symmetric tensors are a subset of the cube space: n^(-d/4)",
        ),
    ]
    if d <= 2:
        value = 1.0 if d == 1 else n ** -0.5
        terms.append(FormulaTerm(name="low_order_exact", role="exact", value=value, note="vectors and matrices"))
        return terms
    if n == 2 and d == 3:
        terms.append(
            FormulaTerm(
                name="zero_one_222_exact",
                role="exact",
                value=COMPLEX_222_VALUE,
                note="the symmetric zero-one tensor with ones at (1,1,2), (1,2,1), (2,1,1) attains the complex value",
            )
        )
    if d % 2 == 0:
        if n % d == 0:
            terms.append(
                FormulaTerm(
                    name="embedding_divisible_upper",
                    role="upper",
                    value=root_fact * d ** (-d / 4) * n ** (-d / 4),
                    note="d!^(1/2) d^(-d/4) n^(-d/4) when d divides n",
                )
            )
        if n >= d:
            terms.append(
                FormulaTerm(
                    name="embedding_upper",
                    role="upper",
                    value=root_fact * d ** (-d / 4) * (n + 1 - d) ** (-d / 4),
                    note="d!^(1/2) d^(-d/4) (n+1-d)^(-d/4) when n >= d",
                )
            )
        terms.append(
            FormulaTerm(
                name="symmetrization_upper",
                role="upper",
                value=root_fact * n ** (-d / 4),
                note="d!^(1/2) n^(-d/4)",
            )
        )
    else:
        if n % d == 0:
            terms.append(
                FormulaTerm(
                    name="embedding_divisible_upper",
                    role="upper",
                    value=root_fact * d ** (-d / 4) * (math.sqrt(n + d) - math.sqrt(d)) ** (-d / 2),
                    note="d!^(1/2) d^(-d/4) (sqrt(n+d) - sqrt(d))^(-d/2) when d divides n",
                )
            )
        if n >= d:
            terms.append(
                FormulaTerm(
                    name="embedding_upper",
                    role="upper",
                    value=root_fact * d ** (-d / 4) * (math.sqrt(n + 1) - math.sqrt(d)) ** (-d / 2),
                    note="d!^(1/2) d^(-d/4) (sqrt(n+1) - sqrt(d))^(-d/2) when n >= d",
                )
            )
        terms.append(
            FormulaTerm(
                name="symmetrization_upper",
                role="upper",
                value=root_fact * min((math.sqrt(n + 1) - 1) ** (-d / 2), n ** (-(d - 1) / 4)),
                note="d!^(1/2) min{(sqrt(n+1) - 1)^(-d/2), n^(-(d-1)/4)}",
            )
        )
    return terms


def _sym_signed_terms(n: int, d: int) -> list[FormulaTerm]:
    lower = n ** (-(d - 1) / 2)
    terms = [
        FormulaTerm(name="trivial_upper", role="upper", value=1.0, note="the ratio never exceeds one"),
        FormulaTerm(name="symmetric_lower", role="lower", value=lower, note="n^(-(d-1)/2)"),
    ]
    if d <= 2:
        value = 1.0 if d == 1 else n ** -0.5
        terms.append(FormulaTerm(name="low_order_exact", role="exact", value=value, note="vectors and matrices"))
        return terms
    log_term = math.sqrt(math.factorial(d) * math.log(d))
    terms.append(
        FormulaTerm(
            name="random_symmetric_upper",
            role="upper",
            value=36 * log_term * lower,
            note="36 sqrt(d! ln d) n^(-(d-1)/2)",
        )
    )
    if n % d == 0:
        terms.append(
            FormulaTerm(
                name="embedding_divisible_upper",
                role="upper",
                value=32 * log_term * lower,
                note="32 sqrt(d! ln d) n^(-(d-1)/2) when d divides n",
            )
        )
    nonneg = _assemble("phi", SpaceSpec(shape=(n,) * d, field=NumberField.NONNEG, symmetric=True), _sym_nonneg_terms(n, d))
    terms.append(
        FormulaTerm(
            name="nonnegative_inclusion_upper",
            role="upper",
            value=nonneg.upper,
            note="symmetric nonnegative tensors are a subset, so their upper bound carries over",
        )
    )
    return terms


def phi_bounds_sym(n: int, d: int, field: NumberField = NumberField.NONNEG) -> BoundReport:
    """Bounds for symmetric tensors of order d in n variables."""
    if n < 2 or d < 1:
        raise ShapeMismatchError(f"symmetric bounds need n >= 2 and d >= 1, got n={n}, d={d}")
    field = NumberField(field)
    space = SpaceSpec(shape=(n,) * d, field=field, symmetric=True)
    if field.is_nonnegative:
        return _assemble("phi", space, _sym_nonneg_terms(n, d), conjectural=field is NumberField.BINARY)
    return _assemble("phi", space, _sym_signed_terms(n, d))


def psi_bounds(space: SpaceSpec) -> BoundReport:
    """
    Lower/upper/exact values of the Frobenius/nuclear extreme ratio.

    Over real and complex fields psi equals phi. Over nonnegative fields the
    two differ in order for d >= 3 except on tall shapes.
    """
    d, shape = space.order, space.shape
    if not space.field.is_nonnegative:
        phi = phi_bounds(space)
        terms = [
            FormulaTerm(
                name=f"phi_{t.name}", role=t.role, value=t.value, note=f"psi equals phi over this field; {t.note}"
            )
            for t in phi.formulas
        ]
        return _assemble("psi", space, terms)

    conjectural = space.field is NumberField.BINARY
    terms = [FormulaTerm(name="trivial_upper", role="upper", value=1.0, note="the ratio never exceeds one")]
    if space.symmetric:
        n = shape[0]
        lower = n ** (-(d - 1) / 2)
        terms.append(FormulaTerm(name="symmetric_lower", role="lower", value=lower, note="n^(-(d-1)/2)"))
        if d <= 2:
            terms.append(FormulaTerm(name="low_order_exact", role="exact", value=lower, note="vectors and matrices"))
            return _assemble("psi", space, terms, conjectural)
        terms.append(
            FormulaTerm(
                name="random_symmetric_upper",
                role="upper",
                value=24 * math.sqrt(2 * math.factorial(d) * math.log(d)) * lower,
                note="24 sqrt(2 d! ln d) n^(-(d-1)/2)",
            )
        )
        signed = phi_bounds_sym(n, d, NumberField.REAL)
    else:
        lower = _orthogonal_lower(shape)
        terms.append(
            FormulaTerm(name="orthogonal_lower", role="lower", value=lower, note="(min_j prod_{k != j} n_k)^(-1/2)")
        )
        if d == 1 or d == 2 or _tall_value(shape) is not None:
            terms.append(
                FormulaTerm(name="tall_exact", role="exact", value=lower, note="tall shapes (including matrices)")
            )
            return _assemble("psi", space, terms, conjectural)
        terms.append(
            FormulaTerm(
                name="random_tensor_upper",
                role="upper",
                value=32 * math.sqrt(2 * d * math.log(d)) * lower,
                note="32 sqrt(2 d ln d) (min_j prod_{k != j} n_k)^(-1/2)",
            )
        )
        signed = phi_bounds(SpaceSpec(shape=shape, field=NumberField.REAL))
    terms.append(
        FormulaTerm(
            name="positive_part_upper",
            role="upper",
            value=math.sqrt(2) * signed.upper,
            note="sqrt(2) times the real bound, from the positive part of a real extreme tensor",
        )
    )
    return _assemble("psi", space, terms, conjectural)


def order_gap(space: SpaceSpec) -> OrderGapReport:
    """Compare the orders of magnitude of phi and psi over a nonnegative space."""
    if not space.field.is_nonnegative:
        raise ConditionError("order gap compares nonnegative spaces; over real/complex fields psi equals phi")
    shape = space.shape
    psi_order = _orthogonal_lower(shape) if len(shape) > 1 else 1.0
    tall = len(shape) <= 2 or _tall_value(shape) is not None
    phi_order = psi_order if tall else math.prod(shape) ** -0.25
    return OrderGapReport(
        shape=shape,
        phi_order=phi_order,
        psi_order=psi_order,
        tall=tall,
        collapsed=tall,
    )


def mono_report(
    smaller: Sequence[int],
    larger: Sequence[int],
    field: NumberField = NumberField.NONNEG,
    reports: Optional[Iterable[BoundReport]] = None,
) -> MonoCheckReport:
    """
    Check emitted bounds against monotonicity in the dimensions: growing any
    dimension can only lower the extreme ratio.

    Args:
        smaller: Shape dominated componentwise by ``larger``.
        larger: The bigger shape, same order.
        field: Field both spaces are taken over.
        reports: Optional precomputed ``(smaller, larger)`` phi reports.

    Raises:
        ShapeMismatchError: The shapes have different orders or are not
            componentwise comparable.
    """
    smaller, larger = tuple(smaller), tuple(larger)
    if len(smaller) != len(larger) or any(a > b for a, b in zip(smaller, larger)):
        raise ShapeMismatchError(f"{smaller} is not componentwise below {larger}")
    field = NumberField(field)
    if reports is not None:
        small_report, large_report = reports
    else:
        small_report = phi_bounds(SpaceSpec(shape=smaller, field=field))
        large_report = phi_bounds(SpaceSpec(shape=larger, field=field))
    violations = []
    if large_report.lower > small_report.upper + 1e-12:
        violations.append(
            f"lower bound {large_report.lower:.6g} of {larger} exceeds upper bound {small_report.upper:.6g} of {smaller}"
        )
    if (
        large_report.exact is not None
        and small_report.exact is not None
        and large_report.exact > small_report.exact + 1e-12
    ):
        violations.append(f"exact value of {larger} exceeds exact value of {smaller}")
    for message in violations:
        logger.warning("monotonicity violated: %s", message)
    return MonoCheckReport(
        smaller=smaller,
        larger=larger,
        field=field,
        smaller_upper=small_report.upper,
        larger_lower=large_report.lower,
        consistent=not violations,
        violations=violations,
    )


def mono_check(
    smaller: Sequence[int],
    larger: Sequence[int],
    field: NumberField = NumberField.NONNEG,
    reports: Optional[Iterable[BoundReport]] = None,
) -> bool:
    return mono_report(smaller, larger, field, reports).consistent
