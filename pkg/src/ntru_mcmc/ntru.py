"""NTRUEncrypt over Z[X]/(X^N - 1) with MCMC-sampled private keys.

Convention: h = p * f^-1 * g (mod q), so decryption never multiplies by p.
Messages and blinding polynomials are ternary.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .polyring import (
    NotInvertible,
    RingElement,
    RingParams,
    add,
    format_element,
    invert_mod,
    mul,
    parse_element,
    reduce_mod,
    scale,
    sub,
)
from .sampler import sample_small_polynomial


class KeygenExhausted(RuntimeError):
    """No acceptable (f, g) was found within the resample budget."""


@dataclass(frozen=True)
class KeygenPolicy:
    key_sigma: float = 1.2
    max_resamples: int = 100
    margin_check: bool = True

    def __post_init__(self):
        if not self.key_sigma > 0:
            raise ValueError("key_sigma must be positive")
        if self.max_resamples < 1:
            raise ValueError("max_resamples must be positive")


@dataclass(frozen=True)
class NtruKeyPair:
    params: RingParams
    f: RingElement
    g: RingElement
    f_inv_q: RingElement
    f_inv_p: RingElement
    h: RingElement


def _l1(a: RingElement) -> int:
    return sum(abs(c) for c in a.coeffs)


def worst_case_bound(f: RingElement, g: RingElement, p: int) -> int:
    """Largest possible |coefficient| of p*r*g + f*m over ternary r, m."""
    return p * _l1(g) + _l1(f)


def _attempt_seeds(seed: int, attempt: int) -> tuple[int, int]:
    ss = np.random.SeedSequence([seed, attempt])
    f_seed, g_seed = ss.generate_state(2, dtype=np.uint64)
    return int(f_seed), int(g_seed)


def keygen(params: RingParams, policy: KeygenPolicy = KeygenPolicy(), seed: int = 0) -> NtruKeyPair:
    N, q, p = params.N, params.q, params.p
    for attempt in range(policy.max_resamples):
        f_seed, g_seed = _attempt_seeds(seed, attempt)
        f = RingElement(sample_small_polynomial(N, policy.key_sigma, f_seed))
        g = RingElement(sample_small_polynomial(N, policy.key_sigma, g_seed))
        if policy.margin_check and 2 * worst_case_bound(f, g, p) >= q:
            continue
        try:
            f_inv_q = invert_mod(f, q)
            f_inv_p = invert_mod(f, p)
        except NotInvertible:
            continue
        h = reduce_mod(scale(mul(f_inv_q, g), p), q)
        return NtruKeyPair(params, f, g, f_inv_q, f_inv_p, h)
    raise KeygenExhausted(
        f"no usable key after {policy.max_resamples} attempts "
        f"(N={N}, q={q}, p={p}, key_sigma={policy.key_sigma}); try a smaller key sigma"
    )


def _require_ternary(name: str, a: RingElement) -> None:
    if not a.is_ternary():
        raise ValueError(f"{name} must have coefficients in {{-1, 0, 1}}")


def encrypt(h: RingElement, m: RingElement, r: RingElement, params: RingParams) -> RingElement:
    _require_ternary("message", m)
    _require_ternary("blinding polynomial", r)
    return reduce_mod(add(mul(r, h), m), params.q, centered=True)


def decrypt(kp: NtruKeyPair, e: RingElement) -> RingElement:
    a = reduce_mod(mul(kp.f, e), kp.params.q, centered=True)
    return reduce_mod(mul(kp.f_inv_p, a), kp.params.p, centered=True)


def decryption_margin(kp: NtruKeyPair, m: RingElement, r: RingElement) -> float:
    """q/2 minus the sup-norm of p*r*g + f*m over the integers."""
    inner = add(scale(mul(r, kp.g), kp.params.p), mul(kp.f, m))
    return kp.params.q / 2 - inner.max_abs()


def random_ternary(N: int, rng: np.random.Generator) -> RingElement:
    return RingElement(tuple(int(c) for c in rng.integers(-1, 2, size=N)))


def public_key_consistent(kp: NtruKeyPair) -> bool:
    """f*h - p*g vanishes mod q."""
    residue = reduce_mod(sub(mul(kp.f, kp.h), scale(kp.g, kp.params.p)), kp.params.q)
    return not any(residue.coeffs)


# --- key files -------------------------------------------------------------


def _params_line(params: RingParams) -> str:
    return f"{params.N} {params.q} {params.p}"


def write_public_key(path, params: RingParams, h: RingElement) -> None:
    Path(path).write_text(f"{_params_line(params)}\n{format_element(h)}\n")


def write_private_key(path, kp: NtruKeyPair) -> None:
    lines = [_params_line(kp.params)] + [format_element(x) for x in (kp.f, kp.h, kp.g, kp.f_inv_q, kp.f_inv_p)]
    Path(path).write_text("\n".join(lines) + "\n")


def _read_lines(path, expected: int) -> tuple[RingParams, list[RingElement]]:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if len(lines) != expected:
        raise ValueError(f"{path}: expected {expected} lines, found {len(lines)}")
    try:
        N, q, p = (int(t) for t in lines[0].split())
    except ValueError:
        raise ValueError(f"{path}:1: expected 'N q p'") from None
    params = RingParams(N, q, p)
    polys = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            polys.append(parse_element(line, N))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    return params, polys


def read_public_key(path) -> tuple[RingParams, RingElement]:
    params, (h,) = _read_lines(path, 2)
    return params, h


def read_private_key(path) -> NtruKeyPair:
    params, (f, h, g, f_inv_q, f_inv_p) = _read_lines(path, 6)
    return NtruKeyPair(params, f, g, f_inv_q, f_inv_p, h)
