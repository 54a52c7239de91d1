"""Cleaner functions that canonicalize property values before comparison.

Cleaners operate on lists of values so that concatenating and splitting
multi-valued properties fit the same interface. Every cleaner is pure,
deterministic, and idempotent.
"""

from __future__ import annotations

import re
import string
import unicodedata
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .model import PropertyValue

ValueList = tuple[PropertyValue, ...]
Cleaner = Callable[[ValueList], ValueList]


class ConfigError(ValueError):
    """Invalid cleaner chain configuration (unknown name, bad params)."""


def _per_value(fn: Callable[[PropertyValue], Optional[PropertyValue]]) -> Cleaner:
    def apply(values: ValueList) -> ValueList:
        out = []
        for v in values:
            r = fn(v)
            if r is not None:
                out.append(r)
        return tuple(out)

    return apply


def _text_map(fn: Callable[[str], str]) -> Cleaner:
    """Lift a string transform to a cleaner; empty output scrubs the value."""

    def one(v: PropertyValue) -> Optional[PropertyValue]:
        if v.kind == "geopoint":
            return v
        raw = fn(v.raw)
        return v.with_raw(raw) if raw else None

    return _per_value(one)


_WS = re.compile(r"\s+")
_PUNCT_TABLE = str.maketrans("", "", string.punctuation)
_NUM_TOKEN = re.compile(r"^\d+$")
_COUNTRY_SUFFIX = re.compile(r",\s*[A-Z]{2}$")

_ORDINAL_WORDS = {
    "one": "1", "two": "2", "three": "3", "four": "4", "five": "5",
    "six": "6", "seven": "7", "eight": "8", "nine": "9", "ten": "10",
    "eleven": "11", "twelve": "12", "thirteen": "13", "fourteen": "14",
    "fifteen": "15", "sixteen": "16", "seventeen": "17", "eighteen": "18",
    "nineteen": "19", "twenty": "20",
}


def _strip_accents(s: str) -> str:
    decomposed = unicodedata.normalize("NFKD", s)
    return "".join(c for c in decomposed if not unicodedata.combining(c))


def _phone_normalize(s: str) -> str:
    s = s.strip()
    if s.startswith("+"):
        s = "00" + s[1:]
    return re.sub(r"\D", "", s)


def _ordinal_to_digit(s: str) -> str:
    return " ".join(_ORDINAL_WORDS.get(tok.lower(), tok) for tok in s.split())


def _address_token_reorder(s: str) -> str:
    """Move a leading house number after the street tokens:
    "11 Str. Herrenanger" -> "Str. Herrenanger 11"."""
    tokens = s.split()
    if len(tokens) >= 2 and _NUM_TOKEN.match(tokens[0]):
        tokens = tokens[1:] + [tokens[0]]
    return " ".join(tokens)


def _token_sort(s: str) -> str:
    return " ".join(sorted(s.split()))


def _number_parse(v: PropertyValue) -> Optional[PropertyValue]:
    if v.kind != "text":
        return v
    raw = v.raw.strip().replace(",", ".")
    try:
        num = float(raw)
    except ValueError:
        return v
    return v.with_raw(repr(num), kind="number")


def _geo_sentinel_scrub(v: PropertyValue) -> Optional[PropertyValue]:
    if v.kind != "geopoint":
        return v
    lat, lon = v.geopoint
    if lat == 0.0 and lon == 0.0:
        return None
    return v


def _alias_concat(sep: str = " ") -> Cleaner:
    def apply(values: ValueList) -> ValueList:
        if len(values) <= 1:
            return values
        joined = sep.join(v.raw for v in values)
        return (values[0].with_raw(joined),)

    return apply


def _alias_split(sep: str = ";") -> Cleaner:
    def apply(values: ValueList) -> ValueList:
        out = []
        for v in values:
            for part in v.raw.split(sep):
                part = part.strip()
                if part:
                    out.append(v.with_raw(part))
        return tuple(out)

    return apply


# name -> factory(params) -> Cleaner
REGISTRY: dict[str, Callable[..., Cleaner]] = {
    "lowercase": lambda: _text_map(str.lower),
    "uppercase": lambda: _text_map(str.upper),
    "trim": lambda: _text_map(str.strip),
    "collapse-whitespace": lambda: _text_map(lambda s: _WS.sub(" ", s).strip()),
    "strip-punctuation": lambda: _text_map(
        lambda s: s.translate(_PUNCT_TABLE)
    ),
    "strip-accents": lambda: _text_map(_strip_accents),
    "digits-only": lambda: _text_map(lambda s: re.sub(r"\D", "", s)),
    "phone-normalize": lambda: _text_map(_phone_normalize),
    "number-parse": lambda: _per_value(_number_parse),
    "ordinal-to-digit": lambda: _text_map(_ordinal_to_digit),
    "address-token-reorder": lambda: _text_map(_address_token_reorder),
    "token-sort": lambda: _text_map(_token_sort),
    "strip-country-suffix": lambda: _text_map(
        lambda s: _COUNTRY_SUFFIX.sub("", s).strip()
    ),
    "geo-sentinel-scrub": lambda: _per_value(_geo_sentinel_scrub),
    "alias-concat": _alias_concat,
    "alias-split": _alias_split,
}


@dataclass(frozen=True)
class CleanerChain:
    """Ordered list of cleaner names, resolved against the registry at
    construction time so an unknown name never fails mid-run."""

    steps: tuple[tuple[str, dict], ...] = ()
    _fns: tuple[Cleaner, ...] = field(default=(), compare=False, repr=False)

    @classmethod
    def of(cls, *steps: str | tuple[str, dict]) -> "CleanerChain":
        normalized = []
        fns = []
        for step in steps:
            name, params = step if isinstance(step, tuple) else (step, {})
            factory = REGISTRY.get(name)
            if factory is None:
                raise ConfigError(f"unknown cleaner: {name!r}")
            try:
                fns.append(factory(**params))
            except TypeError as exc:
                raise ConfigError(f"bad params for cleaner {name!r}: {exc}")
            normalized.append((name, dict(params)))
        return cls(tuple(normalized), tuple(fns))

    def apply(self, values: Sequence[PropertyValue]) -> ValueList:
        if not self._fns:
            return tuple(values)
        key = (_chain_key(self), tuple(values))
        cached = _APPLY_CACHE.get(key)
        if cached is not None:
            return cached
        out = key[1]
        for fn in self._fns:
            out = fn(out)
            if not out:
                break
        if len(_APPLY_CACHE) >= _APPLY_CACHE_LIMIT:
            _APPLY_CACHE.clear()
        _APPLY_CACHE[key] = out
        return out

    def apply_one(self, value: PropertyValue) -> Optional[PropertyValue]:
        out = self.apply((value,))
        return out[0] if out else None


EMPTY_CHAIN = CleanerChain.of()

# cleaners are pure, so repeated applications (e.g. many candidate pairs
# touching the same entity) can share results
_APPLY_CACHE: dict[tuple, ValueList] = {}
_APPLY_CACHE_LIMIT = 1 << 17


def _chain_key(chain: CleanerChain) -> tuple:
    return tuple(
        (name, tuple(sorted(params.items()))) for name, params in chain.steps
    )


def clean(value: PropertyValue, chain: CleanerChain) -> Optional[PropertyValue]:
    """Run one value through a chain; None means the value was scrubbed."""
    return chain.apply_one(value)
