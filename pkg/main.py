import logging

import uvicorn
from fastapi import FastAPI, Request, status
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

import config
from errors import BudgetError, InputError
from routes.domain_routes import router as domain_router
from routes.experiment_routes import router as experiment_router
from routes.kemeny_routes import router as kemeny_router

logger = logging.getLogger(__name__)

app = FastAPI(title="k-Kemeny diversity toolkit")


@app.get("/")
def root():
    return {"service": "kemeny-diversity", "output_dir": config.OUTPUT_DIR}


# Configure CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.exception_handler(BudgetError)
async def budget_error_handler(request: Request, exc: BudgetError):
    return JSONResponse(status_code=status.HTTP_413_REQUEST_ENTITY_TOO_LARGE, content={"detail": str(exc)})


@app.exception_handler(InputError)
async def input_error_handler(request: Request, exc: InputError):
    return JSONResponse(status_code=status.HTTP_400_BAD_REQUEST, content={"detail": str(exc)})


app.include_router(domain_router)
app.include_router(kemeny_router)
app.include_router(experiment_router)

if __name__ == "__main__":
    uvicorn.run(
        "main:app",
        host="0.0.0.0",
        port=8000,
        reload=True,
    )
