"""
HTTP surface over the batch runner.

Each request runs one configuration to completion and returns the same JSON
document the CLI writes with --format json.
"""

import logging
from typing import Any, Dict

from dotenv import load_dotenv
from fastapi import Body, FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import ValidationError

from . import __version__
from .cli import execute
from .config import build_config
from .exceptions import ConfigError
from .meissner_analysis import PhysicalParams, penetration_depth
from .output import to_document

load_dotenv()
LOG = logging.getLogger(__name__)

app = FastAPI(title="Meissner solver", version=__version__)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.get("/")
async def root():
    return {"message": "Meissner solver is running", "version": __version__}


@app.post("/run")
def run_config(body: Dict[str, Any] = Body(...)):
    """Validate the body as a run configuration and execute it"""
    if body.get("output_path") is not None:
        raise HTTPException(status_code=422, detail={"key": "output_path", "message": "not accepted over HTTP"})
    try:
        config = build_config(body)
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail={"key": exc.key, "message": str(exc)})

    code, result = execute(config)
    response: Dict[str, Any] = {"status": "ok" if code == 0 else "failed", "exit_code": code}
    if result is not None:
        response.update(to_document(result, config.model_dump()))
    return response


@app.get("/penetration-depth")
async def get_penetration_depth(
    particle_mass: float = Query(default=PhysicalParams().particle_mass, gt=0, description="pair mass in kg"),
    charge: float = Query(default=PhysicalParams().charge, gt=0, description="pair charge in C"),
    density_d: float = Query(default=1e27, gt=0, description="pairs per m^3"),
    radius_r: float = Query(default=1e-6, gt=0, description="cylinder radius in m"),
):
    """Penetration depth and kappa = R / delta for the given pair gas"""
    try:
        params = PhysicalParams(particle_mass=particle_mass, charge=charge, density_d=density_d, radius_r=radius_r)
    except ValidationError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    delta, kappa = penetration_depth(params)
    return {"delta_m": delta, "kappa": kappa, "params": params.model_dump()}
