"""
Deployment API Routes

``POST /deployments`` accepts a spec URL and credentials and answers with the
deployment record; records can be listed, fetched and torn down.
"""

from flask import Blueprint, Flask, jsonify, request
from pydantic import ValidationError

from api.middleware import error_response, setup_middleware
from deployer.manager import Deployer, DeploymentError
from schemas.api_schemas import DeploymentRequest
from utils.logger import log_error

DEPLOY_ERROR_STATUS = {
    "E_FETCH": 422,
    "E_INVALID_SPEC": 422,
    "E_NO_PORTS": 503,
    "E_LAUNCH": 500,
    "E_NOT_FOUND": 404,
    "E_CONFLICT": 409,
}


def _deployment_error(e: DeploymentError) -> tuple:
    body = {"code": e.code, "message": e.message}
    if e.record is not None:
        body["deployment"] = e.record.to_dict()
    return jsonify(body), DEPLOY_ERROR_STATUS.get(e.code, 500)


def create_deployer_blueprint(deployer: Deployer) -> Blueprint:
    deployer_bp = Blueprint('deployer', __name__)

    @deployer_bp.route('/health', methods=['GET'])
    def health_check():
        return jsonify({
            "status": "ok",
            "deployments": len(deployer.list_deployments()),
            "running": deployer.running_count(),
            "port_range": deployer.config.port_range_text,
        })

    @deployer_bp.route('/deployments', methods=['POST'])
    def create_deployment():
        data = request.get_json(silent=True)
        if not isinstance(data, dict):
            return error_response("E_BAD_REQUEST", "body must be a JSON object with 'spec_url'", 400, "body")
        try:
            deployment_request = DeploymentRequest.model_validate(data)
        except ValidationError as e:
            first = e.errors()[0]
            field = ".".join(str(part) for part in first["loc"])
            # Never echo the submitted input: it may hold secrets
            return error_response("E_BAD_REQUEST", f"{field}: {first['msg']}", 400, f"body.{field}")

        try:
            record = deployer.deploy(deployment_request.spec_url, deployment_request.credentials)
        except DeploymentError as e:
            log_error(e, "POST /deployments", {"spec_url": deployment_request.spec_url})
            return _deployment_error(e)
        return jsonify(record.to_dict()), 201

    @deployer_bp.route('/deployments', methods=['GET'])
    def list_deployments():
        return jsonify([record.to_dict() for record in deployer.list_deployments()])

    @deployer_bp.route('/deployments/<deployment_id>', methods=['GET'])
    def get_deployment(deployment_id):
        try:
            return jsonify(deployer.get_deployment(deployment_id).to_dict())
        except DeploymentError as e:
            return _deployment_error(e)

    @deployer_bp.route('/deployments/<deployment_id>', methods=['DELETE'])
    def delete_deployment(deployment_id):
        try:
            return jsonify(deployer.teardown(deployment_id).to_dict())
        except DeploymentError as e:
            return _deployment_error(e)

    return deployer_bp


def create_deployer_app(deployer: Deployer) -> Flask:
    """Create the Deployment API application"""
    app = Flask(__name__, static_folder=None)
    app.json.sort_keys = False
    app.config['DEPLOYER'] = deployer
    app.register_blueprint(create_deployer_blueprint(deployer))
    setup_middleware(app)
    return app
