from subgoal_planner.server import app, configure
from subgoal_planner.utils import get_env

configure()
port = get_env('PORT', 8000, cast=int)
app.run(host="0.0.0.0", port=port)
