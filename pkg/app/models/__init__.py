from app.models.schemas import *  # noqa: F401, F403
