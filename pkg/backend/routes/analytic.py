# backend/routes/analytic.py
from fastapi import APIRouter, HTTPException
from pydantic import ValidationError

from thrifty.cli_reports import cmd_analytic
from thrifty.errors import ThriftyError
from thrifty.schemas import AnalyticParams, ReportDocument

router = APIRouter(
    prefix="/analytic",
    tags=["Analytic"]
)


# =====================================================
# CLOSED-FORM VARIANCES
# =====================================================
@router.post("", response_model=ReportDocument)
def analytic_report(payload: AnalyticParams):
    """
    V, V_*, V_R over the requested R values and the bounds that apply,
    for a fidelity scenario or an explicit (rho, O) pair.
    """
    try:
        return cmd_analytic(payload)
    except (ThriftyError, ValidationError) as e:
        raise HTTPException(status_code=422, detail=str(e))
