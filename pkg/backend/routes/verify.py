# backend/routes/verify.py
from fastapi import APIRouter, HTTPException, Query

from backend.schemas import HTTP_SUITES, CheckOut, VerifyResponse
from thrifty.verification import run_suite

router = APIRouter(
    prefix="/verify",
    tags=["Verify"]
)


@router.get("/{suite}", response_model=VerifyResponse)
def verify_suite(
    suite: str,
    seed: int = 2024,
    cases: int = Query(default=100, ge=1, le=500),
):
    # the enumeration-heavy suites stay on the CLI
    if suite not in HTTP_SUITES:
        raise HTTPException(
            status_code=422,
            detail=f"suite '{suite}' is not served over HTTP; choose from {list(HTTP_SUITES)} or use the CLI",
        )

    report = run_suite(suite, seed=seed, cases=cases)
    return VerifyResponse(
        suite=report.suite,
        passed=report.passed,
        seed=report.seed,
        cases=report.cases,
        checks=[
            CheckOut(name=c.name, passed=c.passed, measured=c.measured, tolerance=c.tolerance)
            for c in report.checks
        ],
    )
