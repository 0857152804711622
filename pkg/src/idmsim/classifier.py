"""Pluggable toxicity classification.

Three interchangeable backends:

* ``lexicon`` — local case-folded substring matching against a term list.
  Intentionally high-recall/low-precision: any occurrence of a term anywhere
  in the message flags it, including inside longer words.
* ``simulated`` — draws the verdict and latency from a configured model
  (linear in message bytes, optional bounded jitter). The drawn latency is
  reported, not slept; downstream timing adds it where wall time matters.
  All randomness derives from (rng_seed, message hash), so concurrent calls
  and reruns agree.
* ``http`` — a chat-completion endpoint asked for a strict one-word answer.
  Transport or protocol failures raise ClassifierUnavailableError; this
  backend never defaults to a verdict.
"""

from __future__ import annotations

import hashlib
import math
import os
import time
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache

import requests

DEFAULT_BYTES_PER_TOKEN = 2.93

# Placeholder terms only: corpora built from these exercise the moderation
# path without shipping real abusive language. Supply your own lexicon file
# for realistic runs.
DEFAULT_LEXICON = frozenset({
    "blorft", "skazzle", "grimvex", "drazzit", "plonkus",
    "vexnar", "snerglot", "quazmud", "fribbex", "zilcher",
})


class ClassifierUnavailableError(RuntimeError):
    """The configured classifier could not produce a verdict."""


class Label(Enum):
    TOXIC = "toxic"
    NON_TOXIC = "nonToxic"


class Backend(Enum):
    LEXICON = "lexicon"
    SIMULATED = "simulated"
    HTTP = "http"


@dataclass(frozen=True)
class Verdict:
    label: Label
    latency_micros: float
    token_count: int

    def __post_init__(self):
        if self.latency_micros < 0:
            raise ValueError("latency_micros must be non-negative")


@dataclass(frozen=True)
class LatencyModel:
    """Linear validation-time model: intercept + slope * message bytes."""

    intercept_micros: float
    slope_micros_per_byte: float

    def __post_init__(self):
        if self.intercept_micros <= 0:
            raise ValueError("intercept_micros must be positive")
        if self.slope_micros_per_byte < 0:
            raise ValueError("slope_micros_per_byte must be non-negative")

    def predict(self, msg_bytes: int) -> float:
        return self.intercept_micros + self.slope_micros_per_byte * msg_bytes


MAX_JITTER = 0.05


@dataclass(frozen=True)
class ClassifierConfig:
    backend: Backend = Backend.LEXICON
    lexicon_path: str | None = None
    latency: LatencyModel | None = None
    toxic_rate: float = 0.0
    jitter: float = 0.0
    endpoint_url: str | None = None
    model_name: str | None = None
    api_key_env_var: str = "MODSIM_API_KEY"
    rng_seed: int = 0
    http_timeout: float = 30.0

    def __post_init__(self):
        if not 0.0 <= self.toxic_rate <= 1.0:
            raise ValueError("toxic_rate must be in [0, 1]")
        if not 0.0 <= self.jitter <= MAX_JITTER:
            raise ValueError(f"jitter must be in [0, {MAX_JITTER}]")
        if self.backend is Backend.SIMULATED and self.latency is None:
            raise ValueError("simulated backend requires a latency model")


# Anchor points of the external-LLM validation-time profile: a linear model
# through (100 B, 1_098_690.91 us) and (100_000 B, 1_772_946.65 us).
_GPT41_ANCHORS = ((100, 1_098_690.91), (100_000, 1_772_946.65))


def paper_gpt41_latency() -> LatencyModel:
    (x0, y0), (x1, y1) = _GPT41_ANCHORS
    slope = (y1 - y0) / (x1 - x0)
    return LatencyModel(y0 - x0 * slope, slope)


def classifier_profile(name: str, rng_seed: int = 0) -> ClassifierConfig:
    """Shipped classifier configurations, by name."""
    if name == "paper-gpt41":
        return ClassifierConfig(backend=Backend.SIMULATED,
                                latency=paper_gpt41_latency(),
                                toxic_rate=0.0, jitter=0.0,
                                rng_seed=rng_seed)
    if name == "lexicon":
        return ClassifierConfig(backend=Backend.LEXICON, rng_seed=rng_seed)
    raise ValueError(f"unknown classifier profile {name!r}")


@lru_cache(maxsize=16)
def load_lexicon(path: str) -> frozenset:
    """Read a lexicon file: one lowercase term per line, '#' comments."""
    terms = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            term = line.split("#", 1)[0].strip()
            if term:
                terms.add(term.casefold())
    if not terms:
        raise ValueError(f"lexicon file {path!r} contains no terms")
    return frozenset(terms)


def lexicon_classify(message, lexicon) -> Label:
    """Toxic iff any lexicon term occurs case-insensitively in the message."""
    if not lexicon:
        raise ValueError("lexicon must be non-empty")
    folded = message.text.casefold()
    for term in lexicon:
        if term.casefold() in folded:
            return Label.TOXIC
    return Label.NON_TOXIC


def num_tokens(message, bytes_per_token=DEFAULT_BYTES_PER_TOKEN) -> int:
    """ceil(byte length / bytes_per_token) under exact decimal arithmetic."""
    return tokens_for_length(message.byte_length, bytes_per_token)


def tokens_for_length(byte_length: int, bytes_per_token=DEFAULT_BYTES_PER_TOKEN) -> int:
    if byte_length < 0:
        raise ValueError("byte_length must be non-negative")
    ratio = _as_fraction(bytes_per_token)
    if ratio <= 0:
        raise ValueError("bytes_per_token must be positive")
    return math.ceil(Fraction(byte_length) / ratio)


def _as_fraction(x) -> Fraction:
    # Floats are read through their decimal repr so 2.93 means exactly 293/100.
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


def _simulated_draws(config: ClassifierConfig, text: str) -> tuple:
    seed = config.rng_seed.to_bytes(8, "big", signed=False)
    digest = hashlib.sha256(seed + text.encode("utf-8")).digest()
    u_label = int.from_bytes(digest[:8], "big") / 2**64
    u_jitter = int.from_bytes(digest[8:16], "big") / 2**64
    return u_label, u_jitter


def simulated_classify(message, config: ClassifierConfig) -> Verdict:
    u_label, u_jitter = _simulated_draws(config, message.text)
    label = Label.TOXIC if u_label < config.toxic_rate else Label.NON_TOXIC
    latency = config.latency.predict(message.byte_length)
    latency *= 1.0 + config.jitter * (2.0 * u_jitter - 1.0)
    return Verdict(label, latency, num_tokens(message))


_HTTP_SYSTEM_PROMPT = (
    "You are a strict content moderator. Reply with exactly one word: "
    "TOXIC if the message contains toxic, abusive, threatening, hateful, "
    "or sexually explicit content, otherwise NONTOXIC."
)


def http_classify(message, config: ClassifierConfig) -> Verdict:
    """Ask a chat-completion endpoint for a one-word toxicity verdict."""
    api_key = os.environ.get(config.api_key_env_var, "")
    payload = {
        "model": config.model_name,
        "messages": [
            {"role": "system", "content": _HTTP_SYSTEM_PROMPT},
            {"role": "user", "content": message.text},
        ],
    }
    headers = {"Authorization": f"Bearer {api_key}"}
    start = time.perf_counter_ns()
    try:
        resp = requests.post(config.endpoint_url, json=payload,
                             headers=headers, timeout=config.http_timeout)
        resp.raise_for_status()
        content = resp.json()["choices"][0]["message"]["content"]
    except (requests.RequestException, KeyError, IndexError,
            TypeError, ValueError) as exc:
        raise ClassifierUnavailableError(
            f"classifier unavailable: {exc}") from exc
    elapsed_us = (time.perf_counter_ns() - start) / 1_000
    first = content.strip().split()[0].strip(".,!:;").upper() if content.strip() else ""
    if first == "TOXIC":
        label = Label.TOXIC
    elif first == "NONTOXIC":
        label = Label.NON_TOXIC
    else:
        raise ClassifierUnavailableError(
            f"classifier unavailable: unparseable reply {content!r}")
    return Verdict(label, elapsed_us, num_tokens(message))


def classify(message, config: ClassifierConfig) -> Verdict:
    """Dispatch to the configured backend.

    Latency is real elapsed time for lexicon and http, and model-drawn for
    the simulated backend.
    """
    if not message.text:
        raise ValueError("message must be non-empty")
    if config.backend is Backend.SIMULATED:
        return simulated_classify(message, config)
    if config.backend is Backend.HTTP:
        return http_classify(message, config)
    lexicon = (load_lexicon(config.lexicon_path)
               if config.lexicon_path else DEFAULT_LEXICON)
    start = time.perf_counter_ns()
    label = lexicon_classify(message, lexicon)
    elapsed_us = (time.perf_counter_ns() - start) / 1_000
    return Verdict(label, elapsed_us, num_tokens(message))
