# backend/schemas.py
from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel


# -------------------------
# SRE
# -------------------------
class SreResponse(BaseModel):
    family: Literal["w", "w_theta", "phased_w", "snk"]
    n: int
    M2: float
    direct: float | None = None


# -------------------------
# Verification
# -------------------------
HTTP_SUITES = ("charfuncs", "commutant", "bounds")


class CheckOut(BaseModel):
    name: str
    passed: bool
    measured: Any = None
    tolerance: float | None = None


class VerifyResponse(BaseModel):
    suite: str
    passed: bool
    seed: int
    cases: int
    checks: list[CheckOut]
