import os

from flask import Flask

from .api import bp as api_bp
from .config import Config, DevelopmentConfig, ProductionConfig, TestingConfig
from .extensions import limiter

__version__ = "1.0.0"

configurations = {
    "production": ProductionConfig,
    "development": DevelopmentConfig,
    "testing": TestingConfig,
    "default": DevelopmentConfig,
}


def create_app(config_name: str | None = None, **overrides):
    config_name = config_name or os.getenv("FLASK_ENV", "default")
    app = Flask(__name__, instance_relative_config=True)
    app.config.from_object(configurations.get(config_name, ProductionConfig))
    app.config.update(overrides)
    Config.init_app(app)

    app.config.setdefault("JSON_SORT_KEYS", False)
    app.json.sort_keys = app.config["JSON_SORT_KEYS"]
    limiter.init_app(app)

    @app.after_request
    def set_security_headers(response):
        response.headers.setdefault("X-Content-Type-Options", "nosniff")
        response.headers.setdefault("Cache-Control", "no-store")
        return response

    app.register_blueprint(api_bp)

    return app
