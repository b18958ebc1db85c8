# backend/main.py
import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from backend.routes.analytic import router as analytic_router
from backend.routes.sre import router as sre_router
from backend.routes.verify import router as verify_router
from thrifty import __version__, config

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    # ===== STARTUP =====
    config.configure_logging()
    logger.info("Thrifty Shadow Lab %s starting (output dir %s)", __version__, config.OUTPUT_DIR)

    yield

    # ===== SHUTDOWN =====
    logger.info("Thrifty Shadow Lab shutting down")


app = FastAPI(title="Thrifty Shadow Lab", version=__version__, lifespan=lifespan)

app.add_middleware(
    CORSMiddleware,
    allow_origins=[
        "http://localhost:3000",
        "http://127.0.0.1:3000",
    ],
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)


# Routers
app.include_router(analytic_router)
app.include_router(sre_router)
app.include_router(verify_router)


@app.get("/")
def root():
    return {"message": "Thrifty Shadow Lab is up", "version": __version__}
