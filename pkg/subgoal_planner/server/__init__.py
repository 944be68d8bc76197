from .server import PlanningService, app, configure, get_service
