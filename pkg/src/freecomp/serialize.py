"""JSON forms of the calculus objects.

Rationals are ``"num/den"`` strings, ``"inf"`` marks an infinite parameter or
index set, and quadratic surds are ``{"a": "p/q", "b": "p/q", "d": int}``.
Every parse error carries a JSONPath-like location of the offending field.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

import numpy as np

from .errors import InvalidInputError, OutsideClassError, ParseError
from .fdim import (
    ALL_RATIONALS,
    AlgebraExpression,
    Derivation,
    FreeGroupBlock,
    FreeProductExpression,
    HyperfiniteBlock,
    MatrixBlock,
    OpaqueFactorBlock,
    Step,
)
from .moments import ModelState, WordSpec
from .surd import Surd, is_inf

# --------------------------------------------------------------------------
# numbers


def emit_number(x) -> Any:
    if is_inf(x):
        return "inf"
    if isinstance(x, Surd):
        return {"a": emit_number(x.a), "b": emit_number(x.b), "d": x.d}
    if isinstance(x, bool):
        raise InvalidInputError("booleans are not numbers")
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        return f"{x.numerator}/{x.denominator}"
    raise InvalidInputError(f"cannot emit {x!r} exactly")


def parse_number(value, path: str, allow_inf: bool = False):
    if isinstance(value, dict):
        missing = {"a", "b", "d"} - set(value)
        if missing:
            raise ParseError(path, f"surd is missing {sorted(missing)}")
        d = value["d"]
        if not isinstance(d, int) or isinstance(d, bool) or d < 1:
            raise ParseError(f"{path}.d", "radicand must be a positive integer")
        return Surd(parse_number(value["a"], f"{path}.a"), parse_number(value["b"], f"{path}.b"), d)
    if isinstance(value, bool):
        raise ParseError(path, "expected a rational, got a boolean")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        s = value.strip()
        if s == "inf":
            if allow_inf:
                return float("inf")
            raise ParseError(path, "infinity is not allowed here")
        try:
            return Fraction(s)
        except ZeroDivisionError:
            raise ParseError(path, f"zero denominator in {value!r}") from None
        except ValueError:
            raise ParseError(path, f"not a rational {value!r}") from None
    raise ParseError(path, f"expected a 'num/den' string, got {type(value).__name__}")


def _field(obj, key, path):
    if not isinstance(obj, dict):
        raise ParseError(path, f"expected an object, got {type(obj).__name__}")
    if key not in obj:
        raise ParseError(f"{path}.{key}", "missing field")
    return obj[key]


def _list(value, path):
    if not isinstance(value, list):
        raise ParseError(path, f"expected a list, got {type(value).__name__}")
    return value


def _wrap(path, fn, *args):
    # Domain validation errors become parse errors at the enclosing object.
    try:
        return fn(*args)
    except (InvalidInputError, OutsideClassError) as exc:
        raise ParseError(path, str(exc)) from None


# --------------------------------------------------------------------------
# algebra expressions


def emit_block(b) -> dict:
    out: dict[str, Any] = {"kind": b.kind}
    if b.kind == "matrix":
        out["n"] = b.n
    elif b.kind == "lf":
        out["t"] = emit_number(b.t)
    elif b.kind == "opaque":
        out["name"] = b.name
        gens = b.generators
        out["fg_generators"] = ALL_RATIONALS if gens == ALL_RATIONALS else [
            emit_number(g) for g in sorted(gens)
        ]
        if b.scale != 1:
            out["scale"] = emit_number(b.scale)
    out["weight"] = emit_number(b.weight)
    return out


def parse_block(obj, path: str):
    kind = _field(obj, "kind", path)
    weight = parse_number(_field(obj, "weight", path), f"{path}.weight")
    if kind == "matrix":
        n = _field(obj, "n", path)
        if not isinstance(n, int) or isinstance(n, bool):
            raise ParseError(f"{path}.n", "matrix size must be an integer")
        return _wrap(f"{path}.n", MatrixBlock, n, weight)
    if kind == "lf":
        t = parse_number(_field(obj, "t", path), f"{path}.t", allow_inf=True)
        return _wrap(f"{path}.t", FreeGroupBlock, t, weight)
    if kind == "r":
        return _wrap(f"{path}.weight", HyperfiniteBlock, weight)
    if kind == "opaque":
        name = _field(obj, "name", path)
        if not isinstance(name, str) or not name:
            raise ParseError(f"{path}.name", "expected a non-empty string")
        raw = obj.get("fg_generators", [])
        if raw == ALL_RATIONALS:
            gens = ALL_RATIONALS
        else:
            gens = frozenset(
                parse_number(g, f"{path}.fg_generators[{i}]")
                for i, g in enumerate(_list(raw, f"{path}.fg_generators"))
            )
        scale = parse_number(obj.get("scale", "1/1"), f"{path}.scale")
        return _wrap(path, OpaqueFactorBlock, name, gens, scale, weight)
    raise ParseError(f"{path}.kind", f"unknown block kind {kind!r}")


def emit_algebra(expr: AlgebraExpression) -> dict:
    return {"summands": [emit_block(b) for b in expr.summands]}


def parse_algebra(obj, path: str = "$") -> AlgebraExpression:
    raw = _list(_field(obj, "summands", path), f"{path}.summands")
    blocks = [parse_block(b, f"{path}.summands[{i}]") for i, b in enumerate(raw)]
    return _wrap(f"{path}.summands", AlgebraExpression, blocks)


def emit_free_product(fp: FreeProductExpression) -> dict:
    return {
        "family": [emit_algebra(e) for e in fp.family],
        "cardinality": "inf" if fp.infinite else fp.cardinality,
        "extras": [emit_algebra(e) for e in fp.extras],
    }


def parse_free_product(obj, path: str = "$") -> FreeProductExpression:
    family = [
        parse_algebra(e, f"{path}.family[{i}]")
        for i, e in enumerate(_list(_field(obj, "family", path), f"{path}.family"))
    ]
    card = obj.get("cardinality", len(family))
    if card == "inf":
        card = float("inf")
    elif not isinstance(card, int) or isinstance(card, bool):
        raise ParseError(f"{path}.cardinality", "expected an integer or 'inf'")
    extras = [
        parse_algebra(e, f"{path}.extras[{i}]")
        for i, e in enumerate(_list(obj.get("extras", []), f"{path}.extras"))
    ]
    return _wrap(path, FreeProductExpression, tuple(family), card, tuple(extras))


def emit_expression(x) -> dict:
    if isinstance(x, AlgebraExpression):
        return emit_algebra(x)
    if isinstance(x, FreeProductExpression):
        return emit_free_product(x)
    raise InvalidInputError(f"cannot emit {type(x).__name__}")


def parse_expression(obj, path: str = "$"):
    """An algebra (``summands``) or a free product (``family``)."""
    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise ParseError(path, f"invalid JSON: {exc}") from None
    if isinstance(obj, dict) and "family" in obj:
        return parse_free_product(obj, path)
    return parse_algebra(obj, path)


# --------------------------------------------------------------------------
# derivations


def _emit_param(v):
    if isinstance(v, (AlgebraExpression, FreeProductExpression)):
        return {"expression": emit_expression(v)}
    if isinstance(v, bool) or (isinstance(v, int) and not isinstance(v, Fraction)):
        return v
    return emit_number(v)


def _parse_param(v, path):
    if isinstance(v, dict) and "expression" in v:
        return parse_expression(v["expression"], f"{path}.expression")
    if isinstance(v, (bool, int)):
        return v
    return parse_number(v, path)


def emit_derivation(log: Derivation) -> dict:
    return {
        "steps": [
            {
                "rule": s.rule,
                "anchor": s.anchor,
                "before": emit_expression(s.before),
                "after": emit_expression(s.after),
                "params": {k: _emit_param(v) for k, v in s.params.items()},
            }
            for s in log
        ]
    }


def parse_derivation(obj, path: str = "$") -> Derivation:
    steps = []
    for i, s in enumerate(_list(_field(obj, "steps", path), f"{path}.steps")):
        p = f"{path}.steps[{i}]"
        params = s.get("params", {})
        steps.append(
            Step(
                _field(s, "rule", p),
                _field(s, "anchor", p),
                parse_expression(_field(s, "before", p), f"{p}.before"),
                parse_expression(_field(s, "after", p), f"{p}.after"),
                {k: _parse_param(v, f"{p}.params.{k}") for k, v in params.items()},
            )
        )
    return Derivation(steps)


# --------------------------------------------------------------------------
# moment-engine documents


def _parse_complex(v, path):
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
    ):
        return complex(v[0], v[1])
    raise ParseError(path, "expected a number or an [re, im] pair")


def parse_model(obj, path: str = "$") -> ModelState:
    dims = _list(_field(obj, "blocks", path), f"{path}.blocks")
    for i, d in enumerate(dims):
        if not isinstance(d, int) or isinstance(d, bool) or d < 1:
            raise ParseError(f"{path}.blocks[{i}]", "block dimension must be a positive integer")
    raw_w = _list(_field(obj, "weights", path), f"{path}.weights")
    weights = [parse_number(w, f"{path}.weights[{i}]") for i, w in enumerate(raw_w)]
    for i, w in enumerate(weights):
        if not isinstance(w, Fraction) or w <= 0:
            raise ParseError(f"{path}.weights[{i}]", "weights must be positive rationals")
    raw_e = obj.get("elements", {})
    if not isinstance(raw_e, dict):
        raise ParseError(f"{path}.elements", "expected an object of named elements")
    elements = {}
    for name, blocks in raw_e.items():
        p = f"{path}.elements.{name}"
        arrs = []
        for j, block in enumerate(_list(blocks, p)):
            rows = _list(block, f"{p}[{j}]")
            arrs.append(
                np.array(
                    [
                        [_parse_complex(x, f"{p}[{j}][{r}][{c}]") for c, x in enumerate(_list(row, f"{p}[{j}][{r}]"))]
                        for r, row in enumerate(rows)
                    ],
                    dtype=complex,
                ).reshape(len(rows), -1)
            )
        elements[name] = arrs
    return _wrap(path, ModelState, dims, weights, elements)


def emit_model(model: ModelState) -> dict:
    return {
        "blocks": list(model.dims),
        "weights": [emit_number(w) for w in model.weights],
        "elements": {
            name: [[[[float(x.real), float(x.imag)] for x in row] for row in b] for b in blocks]
            for name, blocks in model.elements.items()
        },
    }


def parse_word_spec(obj, path: str = "$") -> WordSpec:
    coeffs = _list(_field(obj, "coefficients", path), f"{path}.coefficients")
    for i, c in enumerate(coeffs):
        if not isinstance(c, str):
            raise ParseError(f"{path}.coefficients[{i}]", "expected an element name")
    proj = _field(obj, "projection", path)
    if not isinstance(proj, str):
        raise ParseError(f"{path}.projection", "expected an element name")
    return _wrap(path, WordSpec, coeffs, proj)


def emit_word_spec(word: WordSpec) -> dict:
    return {"coefficients": list(word.coefficients), "projection": word.projection}


def parse_moments_document(obj, path: str = "$") -> tuple:
    """``{"model": ..., "word": ...}`` or the model fields with a top-level ``word``."""
    if not isinstance(obj, dict):
        raise ParseError(path, "expected an object")
    model_obj = obj.get("model", obj)
    model_path = f"{path}.model" if "model" in obj else path
    model = parse_model(model_obj, model_path)
    word = parse_word_spec(_field(obj, "word", path), f"{path}.word")
    return model, word


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)
