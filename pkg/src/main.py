import logging

from dotenv import load_dotenv
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from src.api.routes import analysis, simulation
from src.core.config import get_settings, load_preset
from src.core.errors import DataFileError

load_dotenv()
logging.basicConfig(level=get_settings().log_level.upper())
logger = logging.getLogger(__name__)

app = FastAPI(title="tmdnp", description="Thermal-mixing DNP simulation and analysis")

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["*"],
    allow_headers=["*"],
)

# Register routers
app.include_router(simulation.simulationRouter)
app.include_router(analysis.analysisRouter)


@app.get("/api/presets/paper")
def paper_preset():
    """The bundled preset every endpoint starts from."""
    try:
        return load_preset()
    except DataFileError as e:
        raise HTTPException(status_code=e.http_status, detail=e.to_dict())


logger.info("tmdnp API initialized with simulation and analysis routes")
