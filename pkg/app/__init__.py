import logging

from flask import Flask, jsonify

from app.models import ValidationError
from app.services.constants import UnknownConstantError
from app.services.fdm import SingularSystemError
from app.services.metrics import FitError
from app.services.optim import NonConvexError

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _configure_logging(level: str) -> None:
    logger = logging.getLogger("app")
    logger.setLevel(level)
    if not logger.handlers:
        handler = logging.StreamHandler()  # stderr
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)


def create_app(config_name=None):
    app = Flask(__name__)

    if config_name == "testing":
        app.config.from_object("app.config.TestingConfig")
    else:
        app.config.from_object("app.config.Config")

    _configure_logging(app.config["LOG_LEVEL"])

    from app.cli import heatfd
    from app.routes.api import api_bp

    app.register_blueprint(api_bp, url_prefix="/api")
    app.cli.add_command(heatfd)

    @app.errorhandler(ValidationError)
    @app.errorhandler(UnknownConstantError)
    @app.errorhandler(FitError)
    def handle_bad_request(e):
        message = e.args[0] if e.args else str(e)
        return jsonify({"error": message}), 400

    @app.errorhandler(SingularSystemError)
    @app.errorhandler(NonConvexError)
    def handle_compute_failure(e):
        return jsonify({"error": str(e)}), 422

    return app
