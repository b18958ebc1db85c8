# backend/routes/sre.py
from typing import Literal

from fastapi import APIRouter, HTTPException, Query

from backend.schemas import SreResponse
from thrifty.cli_reports import cmd_sre
from thrifty.errors import ThriftyError
from thrifty.schemas import SreParams

router = APIRouter(
    prefix="/sre",
    tags=["SRE"]
)


@router.get("/{family}", response_model=SreResponse)
def stabilizer_entropy(
    family: Literal["w", "w_theta", "phased_w", "snk"],
    n: int = Query(ge=1),
    k: int = Query(default=0, ge=0),
    theta: float = 0.0,
    thetas: list[float] | None = Query(default=None),
    direct: bool = False,
):
    """Stabilizer 2-Renyi entropy of a named family; angles in radians."""
    try:
        params = SreParams(
            family=family,
            n=n,
            k=k,
            theta=theta,
            thetas=tuple(thetas) if thetas else None,
            direct=direct,
        )
        doc = cmd_sre(params)
    except (ThriftyError, ValueError) as e:
        raise HTTPException(status_code=422, detail=str(e))

    return SreResponse(family=family, n=n, M2=doc.results["M2"], direct=doc.results.get("direct"))
