import math

# absolute slack on every metric inequality
TOL = 1e-9

# a real within this distance of an integer k is treated as k before ceiling
CEIL_GUARD = 1e-12


def ceil_guarded(x):
    """Ceiling of ``x`` that snaps near-integers to the integer.

    Floating point makes ``3 / 0.1`` come out as ``30.000000000000004``;
    a plain ceiling would then return 31.
    """
    x = float(x)
    if not math.isfinite(x):
        raise OverflowError(f"cannot take the ceiling of {x}")
    k = round(x)
    if abs(x - k) <= CEIL_GUARD:
        return int(k)
    return int(math.ceil(x))
