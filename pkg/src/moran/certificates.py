"""Self-contained result certificates with deterministic serialization.

A certificate carries everything needed to re-check its claims without
recomputation elsewhere: the fingerprint of the system it talks about,
the elements themselves, and the tool version. Serialization is JSON
with sorted keys, so identical inputs give byte-identical files.
"""

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import __version__
from .errors import DomainError, ParseError, PreconditionError
from .spectra import (
    SpectrumBuildParams,
    verify_orthogonal,
    verify_tail_lower_bound,
)
from .system import MoranSystem, normalize
from .tiling import aggregate, verify_tiling

KINDS = ("tile", "spectrum-level", "verification")


def tool_stamp() -> dict:
    return {"name": "moran", "version": __version__}


def _fraction_text(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def tile_certificate(fingerprint: str, agg, comp) -> dict:
    """Package a verified level-k tiling: digit set, complement, modulus."""
    if not agg.direct:
        raise PreconditionError("only direct expansions are certified")
    if agg.k != comp.k or agg.modulus != comp.modulus:
        raise PreconditionError("digit set and complement describe different levels")
    return {
        "kind": "tile",
        "fingerprint": fingerprint,
        "tool": tool_stamp(),
        "payload": {
            "k": agg.k,
            "modulus": agg.modulus,
            "exponents": list(agg.exponents),
            "digit_elements": list(agg.elements),
            "complement_elements": list(comp.elements),
        },
    }


def _block_record(block) -> dict:
    floor = block.factor_floor
    if floor is not None and not math.isfinite(floor):
        floor = None
    return {
        "k1": block.k1,
        "k2": block.k2,
        "anchor": block.anchor,
        "coefficients": list(block.coefficients),
        "offsets": list(block.offsets or ()),
        "factor_floor": floor,
    }


def spectrum_certificate(fingerprint: str, N: int, levels) -> dict:
    """Package built levels with their exact verification outcomes.

    Elements are stored in the scale-normalized frame; the denormalized
    column divides them by N**scale_exponent, which is the frame of the
    system the fingerprint names.
    """
    if not levels:
        raise PreconditionError("need at least one level")
    m = levels[0].scale_exponent
    if any(lv.scale_exponent != m for lv in levels):
        raise PreconditionError("levels disagree on the scale exponent")
    den = N**m
    records = []
    for lv in levels:
        records.append(
            {
                "level": lv.level,
                "breakpoints": list(lv.breakpoints),
                "elements": list(lv.elements),
                "denormalized": [
                    _fraction_text(Fraction(e, den)) for e in lv.elements
                ],
                "tail_bound": lv.tail_bound,
                "orthogonal": lv.orthogonal,
                "complete": lv.complete,
                "blocks": [_block_record(blk) for blk in lv.blocks],
            }
        )
    return {
        "kind": "spectrum-level",
        "fingerprint": fingerprint,
        "tool": tool_stamp(),
        "payload": {
            "scale_exponent": m,
            "denominator": den,
            "levels": records,
        },
    }


def verification_certificate(fingerprint: str, source_kind: str, report) -> dict:
    return {
        "kind": "verification",
        "fingerprint": fingerprint,
        "tool": tool_stamp(),
        "payload": {
            "source_kind": source_kind,
            "passed": report.passed,
            "checks": [
                {"name": name, "ok": ok, "detail": detail}
                for name, ok, detail in report.checks
            ],
        },
    }


def dumps(cert: dict) -> str:
    return json.dumps(cert, sort_keys=True, indent=2, allow_nan=False) + "\n"


def loads(text: str) -> dict:
    try:
        cert = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"certificate is not valid JSON: {exc}") from exc
    if not isinstance(cert, dict):
        raise ParseError("certificate must be a JSON object")
    kind = cert.get("kind")
    if kind not in KINDS:
        raise ParseError(f"unknown certificate kind {kind!r}")
    if not isinstance(cert.get("fingerprint"), str):
        raise ParseError("certificate is missing its system fingerprint")
    if not isinstance(cert.get("payload"), dict):
        raise ParseError("certificate is missing its payload")
    return cert


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of re-running a certificate's checks, one row per check."""

    passed: bool
    checks: tuple

    def first_failure(self):
        for name, ok, detail in self.checks:
            if not ok:
                return (name, detail)
        return None


def _check_tile(payload, sys: MoranSystem, checks):
    k = payload["k"]
    agg = aggregate(sys, k)
    stated = tuple(payload["digit_elements"])
    match = stated == agg.elements
    detail = None
    if not match:
        extra = sorted(set(stated).symmetric_difference(agg.elements))
        detail = f"first differing element {extra[0]}"
    checks.append(("digit-set", match, detail))
    checks.append(
        (
            "direct-sum",
            agg.direct,
            f"value {agg.collisions[0]} reached twice" if agg.collisions else None,
        )
    )
    checks.append(
        (
            "modulus",
            payload["modulus"] == agg.modulus,
            f"recomputed {agg.modulus}",
        )
    )
    checks.append(
        (
            "complement-tiles",
            verify_tiling(stated, tuple(payload["complement_elements"]), payload["modulus"]),
            None,
        )
    )


def _check_spectrum(payload, sys: MoranSystem, checks, params, tol):
    work, m = normalize(sys)
    checks.append(
        ("scale-exponent", m == payload["scale_exponent"], f"recomputed {m}")
    )
    checks.append(
        (
            "denominator",
            payload["denominator"] == sys.N ** payload["scale_exponent"],
            None,
        )
    )
    den = sys.N**m
    for record in payload["levels"]:
        tag = f"level-{record['level']}"
        k = record["breakpoints"][-1]
        elements = list(record["elements"])
        checks.append(
            (
                f"{tag}-cardinality",
                len(set(elements)) == sys.N**k,
                f"{len(set(elements))} distinct elements, expected {sys.N ** k}",
            )
        )
        try:
            orth, witness = verify_orthogonal(work, elements, k)
        except DomainError as exc:
            orth, witness = False, str(exc)
        checks.append(
            (
                f"{tag}-orthogonality",
                orth,
                None if orth else f"difference {witness} is not a transform zero",
            )
        )
        ok, bound, tail_witness = verify_tail_lower_bound(work, elements, k, params)
        stated = record.get("tail_bound")
        tail_ok = ok and stated is not None and bound >= stated - tol
        checks.append(
            (
                f"{tag}-tail",
                tail_ok,
                f"recomputed {bound:.6g} against stated {stated}"
                if not tail_ok
                else None,
            )
        )
        scaled = [_fraction_text(Fraction(e, den)) for e in elements]
        checks.append(
            (
                f"{tag}-scaling",
                scaled == list(record["denormalized"]),
                None,
            )
        )


def verify_certificate(
    cert: dict,
    sys: MoranSystem,
    expected_fingerprint: Optional[str] = None,
    params: Optional[SpectrumBuildParams] = None,
    tol: float = 1e-12,
) -> VerificationReport:
    """Independently re-run every check a certificate claims.

    The caller supplies the system parsed from its own configuration;
    when expected_fingerprint is given it must match the certificate
    before anything is recomputed.
    """
    if (
        expected_fingerprint is not None
        and cert["fingerprint"] != expected_fingerprint
    ):
        raise PreconditionError(
            f"certificate fingerprint {cert['fingerprint'][:12]} does not match "
            f"the configured system {expected_fingerprint[:12]}"
        )
    kind = cert["kind"]
    if kind == "verification":
        raise PreconditionError(
            "verification certificates are reports; nothing to re-run"
        )
    checks = []
    if kind == "tile":
        _check_tile(cert["payload"], sys, checks)
    else:
        _check_spectrum(cert["payload"], sys, checks, params, tol)
    return VerificationReport(
        passed=all(ok for _, ok, _ in checks), checks=tuple(checks)
    )
