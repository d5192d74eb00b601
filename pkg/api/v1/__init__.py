from fastapi import APIRouter
from api.v1.irls.router import IrlsRouter
from api.v1.frequency.router import FrequencyRouter
api_router = APIRouter()

api_router.include_router(IrlsRouter().router)
api_router.include_router(FrequencyRouter().router)

@api_router.get("/health")
def index():
	return {"status": "ok"}
