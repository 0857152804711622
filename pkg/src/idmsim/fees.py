"""Moderation economics: execution fees, the gas model, and calibration.

Two fee families coexist and are selected by moderation mode: builder-side
classification is compensated through modExecFee (flat + per-byte for local
classification, per-token for external services, settled in wei against the
sender's priority-fee budget), while user-side proofs are compensated through
a gas-metered verification path (gas_used_mod) that senders must cover with
their gasLimit.

All monetary and gas outputs are integers; fractional intermediate values are
kept exact and rounded half-up once, at the end of each formula.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from fractions import Fraction

from .classifier import DEFAULT_BYTES_PER_TOKEN, LatencyModel, num_tokens
from .txmodel import BASE_GAS, Transaction, decode_idm

WEI_PER_ETH = 10**18
GWEI = 10**9

# External classification pricing anchors: a 1000-byte message costs
# 0.00069 USD at 341 tokens on the reference service.
GPT41_COST_USD_PER_TOKEN = 0.00069 / 341


@dataclass(frozen=True)
class FeeSchedule:
    """Every economic constant used by the simulator.

    f0/f1 price local moderation (wei flat + wei per byte); c_usd_per_token
    prices external moderation, converted at a static eth_usd_rate; alpha,
    beta, epsilon parameterize the proof-verification gas model; base_fee and
    priority_fee are per-gas wei rates.
    """

    f0: int = 0
    f1: int = 0
    c_usd_per_token: float = 0.0
    eth_usd_rate: float = 3000.0
    alpha: int = 0
    beta: int = 0
    epsilon: int = 0
    base_gas: int = BASE_GAS
    base_fee: int = 10 * GWEI
    priority_fee: int = 2 * GWEI

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be non-negative")
        if self.base_gas != BASE_GAS:
            raise ValueError(f"base_gas is fixed at {BASE_GAS}")


def _frac(x) -> Fraction:
    # Floats are taken at their decimal face value (5.12 -> 128/25).
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


def _round_half_up(x: Fraction) -> int:
    return int(x + Fraction(1, 2))


def mod_exec_fee_local(msg_bytes: int, s: FeeSchedule) -> int:
    """Local-classification fee in wei: f0 + f1 * message bytes."""
    return _round_half_up(_frac(s.f0) + _frac(s.f1) * msg_bytes)


def external_fee_for_length(msg_bytes: int, s: FeeSchedule,
                            bytes_per_token=DEFAULT_BYTES_PER_TOKEN) -> int:
    from .classifier import tokens_for_length

    tokens = tokens_for_length(msg_bytes, bytes_per_token)
    if s.eth_usd_rate == 0:
        raise ValueError("eth_usd_rate must be positive for external fees")
    usd = _frac(s.c_usd_per_token) * tokens
    return _round_half_up(usd / _frac(s.eth_usd_rate) * WEI_PER_ETH)


def mod_exec_fee_external(msg, s: FeeSchedule,
                          bytes_per_token=DEFAULT_BYTES_PER_TOKEN) -> int:
    """External-classification fee in wei: per-token cost * token count."""
    return external_fee_for_length(msg.byte_length, s, bytes_per_token)


def gas_used_mod(msg_bytes: int, s: FeeSchedule) -> int:
    """Gas consumed by a proof-verifying inclusion: base + alpha + beta*bytes."""
    return _round_half_up(_frac(s.base_gas) + _frac(s.alpha)
                          + _frac(s.beta) * msg_bytes)


def calibrate_gas_model(fit: LatencyModel, baseline_micros) -> tuple[int, int]:
    """Derive (alpha, beta) from a validation-time fit and a baseline.

    Validation work is priced at base_gas / baseline_micros gas per
    microsecond. alpha converts the fit's intercept excess over the baseline
    at that rate; beta prices each message byte at the gas-equivalent of one
    microsecond of baseline validation work.
    """
    baseline = _frac(baseline_micros)
    if baseline <= 0:
        raise ValueError("baseline_micros must be positive")
    gas_per_micro = Fraction(BASE_GAS) / baseline
    alpha = _round_half_up((_frac(fit.intercept_micros) - baseline)
                           * gas_per_micro)
    beta = _round_half_up(gas_per_micro)
    return alpha, beta


def total_fee(msg_bytes: int, s: FeeSchedule) -> int:
    """Sender's total wei cost: gas_used_mod * (base_fee + priority_fee)."""
    return gas_used_mod(msg_bytes, s) * (s.base_fee + s.priority_fee)


def builder_reward(msg_bytes: int, s: FeeSchedule) -> int:
    """Builder's wei reward: gas_used_mod * priority_fee."""
    return gas_used_mod(msg_bytes, s) * s.priority_fee


def recommended_gas_limit(msg_bytes: int, s: FeeSchedule) -> int:
    """gas_used_mod plus the epsilon buffer against out-of-gas reverts."""
    return gas_used_mod(msg_bytes, s) + s.epsilon


def fee_sufficient(tx: Transaction, mode, s: FeeSchedule, *,
                   msg_bytes: int | None = None,
                   external: bool = False) -> bool:
    """Whether a semantic-content tx provides enough fee for its mode.

    builderMod compares the priority-fee budget (gasLimit * priority fee cap)
    against modExecFee; userMod requires gasLimit to cover gas_used_mod.
    msg_bytes overrides the message length when the caller has already
    isolated the message (e.g. stripped an embedded proof).
    """
    if msg_bytes is None:
        msg = decode_idm(tx.input)
        if msg is None:
            raise ValueError("fee_sufficient requires semantic content")
        msg_bytes = msg.byte_length
    mode_name = getattr(mode, "value", mode)
    if mode_name == "builderMod":
        budget = tx.meta.gas_limit * tx.meta.max_priority_fee_per_gas
        if external:
            required = external_fee_for_length(msg_bytes, s)
        else:
            required = mod_exec_fee_local(msg_bytes, s)
        return budget >= required
    if mode_name == "userMod":
        return tx.meta.gas_limit >= gas_used_mod(msg_bytes, s)
    raise ValueError(f"no fee rule for mode {mode_name!r}")


def fee_profile(name: str) -> FeeSchedule:
    """Shipped fee schedules, by name."""
    if name == "paper-calibrated":
        return FeeSchedule(c_usd_per_token=GPT41_COST_USD_PER_TOKEN,
                           alpha=262_828, beta=4_102, epsilon=10_000)
    if name == "zero":
        return FeeSchedule()
    raise ValueError(f"unknown fee profile {name!r}")


_INT_FIELDS = {"f0", "f1", "alpha", "beta", "epsilon", "base_gas",
               "base_fee", "priority_fee"}
_FLOAT_FIELDS = {"c_usd_per_token", "eth_usd_rate"}


def save_fee_schedule(s: FeeSchedule, path: str) -> None:
    lines = [f"{f.name}={getattr(s, f.name)!r}" for f in fields(s)]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_fee_schedule(path: str) -> FeeSchedule:
    """Read a schedule from a key=value file ('#' comments allowed)."""
    kwargs = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            if key in _INT_FIELDS:
                kwargs[key] = int(value)
            elif key in _FLOAT_FIELDS:
                kwargs[key] = float(value)
            else:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
    return FeeSchedule(**kwargs)
