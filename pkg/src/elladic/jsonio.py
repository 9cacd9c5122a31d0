"""Wire formats: loading inputs, canonical output and run manifests."""

from __future__ import annotations

import hashlib
import json
import sys

from . import __version__
from .bar import BarChain, FiniteGroup, GroupAutomorphism, MatrixRep, homomorphism_cocycle, parse_modulus
from .errors import ValidationError
from .flows import SeriesMap, field_from_json
from .padic_core import INF, RingSpec
from .regulator import as_matrix
from .series import DiffForm, TruncSeries


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


class InputSet:
    """Reads JSON inputs and remembers their digests for the manifest."""

    def __init__(self):
        self.digests = {}

    def load(self, path):
        try:
            if path == "-":
                raw = sys.stdin.buffer.read()
            else:
                with open(path, "rb") as fh:
                    raw = fh.read()
        except OSError as exc:
            raise ValidationError(f"cannot read {path}: {exc.strerror}", path=path) from None
        self.digests[path] = digest(raw)
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path} is not valid JSON: {exc.msg}", path=path, line=exc.lineno) from None


def _need(obj, key, what):
    if not isinstance(obj, dict) or key not in obj:
        raise ValidationError(f"{what} JSON lacks '{key}'")
    return obj[key]


# ---------------------------------------------------------------------------
# series-level objects

def load_series(obj) -> TruncSeries:
    return TruncSeries.from_json(obj)


def load_map(obj) -> SeriesMap:
    if isinstance(obj, dict) and "terms" in obj:
        return SeriesMap([TruncSeries.from_json(obj)])
    return SeriesMap.from_json(obj)


def load_field(obj):
    return field_from_json(obj)


def load_form(obj) -> DiffForm:
    return DiffForm.from_json(obj)


def load_ring(obj) -> RingSpec:
    try:
        return RingSpec.from_json(obj)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"bad ring JSON: {exc}") from None


# ---------------------------------------------------------------------------
# groups, chains and representations

def load_group(obj) -> FiniteGroup:
    try:
        return FiniteGroup.from_json(obj)
    except (KeyError, TypeError, IndexError) as exc:
        raise ValidationError(f"bad group JSON: {exc}") from None


def element(group, x):
    if isinstance(x, str):
        try:
            return group.index(x)
        except ValueError:
            raise ValidationError(f"unknown group element {x!r}") from None
    x = int(x)
    if not 0 <= x < group.order:
        raise ValidationError("element index out of range", index=x)
    return x


def load_chain(obj, group) -> BarChain:
    try:
        return BarChain.from_json(obj, group)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"bad chain JSON: {exc}") from None
    except ValueError as exc:
        raise ValidationError(f"bad chain JSON: {exc}") from None


def load_rep(obj, group) -> MatrixRep:
    """{"ell","P","images"} with one matrix per element, or
    {"ell","P","generators","generator_images"}."""
    ell, P = int(_need(obj, "ell", "rep")), int(_need(obj, "P", "rep"))
    det_char = obj.get("det_char")
    if "images" in obj:
        return MatrixRep(group, obj["images"], ell, P, det_char)
    gens = [element(group, g) for g in _need(obj, "generators", "rep")]
    imgs = _need(obj, "generator_images", "rep")
    if len(imgs) != len(gens):
        raise ValidationError("one image per generator is required")
    return MatrixRep.from_generators(group, gens, imgs, ell, P, det_char)


def load_automorphism(obj, group) -> GroupAutomorphism:
    if "perm" in obj:
        return GroupAutomorphism(group, [int(x) for x in obj["perm"]])
    gens = [element(group, g) for g in _need(obj, "generators", "automorphism")]
    imgs = [element(group, g) for g in _need(obj, "images", "automorphism")]
    return GroupAutomorphism.from_generators(group, gens, imgs)


def load_cocycle(obj, group):
    """(values per element, modulus) from {"mod", "values"} or
    {"mod", "generators", "generator_values"} for homomorphisms."""
    ell, k = parse_modulus(_need(obj, "mod", "cocycle"))
    mod = ell ** k
    if "values" in obj:
        vals = [as_matrix(m) for m in obj["values"]]
        if len(vals) != group.order:
            raise ValidationError("one cocycle value per element is required")
        return vals, mod
    gens = [element(group, g) for g in _need(obj, "generators", "cocycle")]
    return homomorphism_cocycle(group, gens, _need(obj, "generator_values", "cocycle"), mod), mod


# ---------------------------------------------------------------------------
# manifests

def _exponent(x):
    return "inf" if x == INF else str(x)


def manifest(argv, inputs: InputSet, seed, precision=None, cutoff=None, ring=None, wall_time=None,
             errors=()):
    out = {"command": list(argv), "inputs": dict(sorted(inputs.digests.items())), "version": __version__,
           "seed": seed}
    if ring is not None:
        out["ring"] = ring.to_json() if isinstance(ring, RingSpec) else ring
    if precision is not None:
        out["precision"] = precision
    if cutoff is not None:
        out["cutoff"] = cutoff
    errs = [e for e in errors if e is not None]
    if errs:
        out["certified_error"] = {"min": _exponent(min(errs)), "count": len(errs)}
    if wall_time is not None:
        out["wall_time_s"] = round(wall_time, 3)
    return out


def certified_errors(obj):
    """All certified_error exponents found anywhere in a result."""
    found = []
    if isinstance(obj, dict):
        for key, value in obj.items():
            if key == "certified_error" and isinstance(value, (str, int)):
                found.append(INF if value == "inf" else _as_number(value))
            else:
                found.extend(certified_errors(value))
    elif isinstance(obj, list):
        for value in obj:
            found.extend(certified_errors(value))
    return [f for f in found if f is not None]


def _as_number(text):
    from fractions import Fraction
    try:
        return Fraction(str(text))
    except ValueError:
        return None
