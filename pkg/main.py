import logging
from fastapi import FastAPI , Request
from api.v1 import api_router
from core.config import VERSION, settings
from core.logger import configure_logging
from fastapi.middleware.cors import CORSMiddleware
from starlette.responses import JSONResponse

configure_logging(settings.LOG_LEVEL)

# Create a FastAPI application instance
app = FastAPI(title="struchmirls", version=VERSION)

# Include the API routes from the v1 submodule
app.include_router(api_router)

# Add CORS middleware to the application
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

@app.exception_handler(Exception)
async def global_exception_handler(request: Request, exc: Exception):
    logging.error(f"Unhandled error: {exc}", exc_info=True)  # Logs full traceback
    return JSONResponse(content={"error": str(exc)}, status_code=500)

# Define a route for the root endpoint
@app.get("/")
def root():
    """
    Handler for the root endpoint.

    Returns:
        dict: Service status and library version.
    """
    return {"status": "ok", "version": VERSION}

if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8000)
