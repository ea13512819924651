"""
API Schemas

Pydantic schemas for the generated services' run endpoints and for the
Deployment API.
"""

from datetime import datetime
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, StrictInt, field_validator

from spec.diagnostics import Diagnostic
from spec.models import MAX_SHOTS

MAX_SEED = 2 ** 64 - 1


class DeploymentStatus(str, Enum):
    DEPLOYING = "deploying"
    RUNNING = "running"
    FAILED = "failed"
    STOPPED = "stopped"


# Request Schemas

class RunRequest(BaseModel):
    """Body of ``POST <endpoint>``; both fields optional"""
    model_config = ConfigDict(extra='forbid')

    shots: Optional[StrictInt] = Field(None, ge=1, le=MAX_SHOTS, description="Number of shots")
    seed: Optional[StrictInt] = Field(None, ge=0, le=MAX_SEED, description="Sampler seed, 64-bit unsigned")


class DeploymentRequest(BaseModel):
    """Body of ``POST /deployments``"""
    model_config = ConfigDict(extra='forbid')

    spec_url: str = Field(..., min_length=1, description="URL of the extended OpenAPI document")
    credentials: Dict[str, str] = Field(default_factory=dict, description="Provider id to secret")

    @field_validator('spec_url')
    @classmethod
    def validate_spec_url(cls, v):
        if not v.strip():
            raise ValueError('spec_url cannot be blank')
        return v.strip()

    @field_validator('credentials')
    @classmethod
    def validate_credentials(cls, v):
        for provider_id, secret in v.items():
            if not provider_id.strip():
                raise ValueError('credential provider ids cannot be blank')
            if not secret:
                raise ValueError(f"credential for '{provider_id}' is empty")
        return v

    def __repr__(self) -> str:
        return f"DeploymentRequest(spec_url={self.spec_url!r}, credentials=<{len(self.credentials)} hidden>)"

    __str__ = __repr__


# Response Schemas

class ExecutionPayload(BaseModel):
    """200 body of a run endpoint"""
    counts: Dict[str, int]
    shots: int
    seed: int
    backend: str


class ErrorBody(BaseModel):
    """Error body shared by every HTTP surface; mirrors Diagnostic"""
    code: str
    message: str
    location: Optional[str] = None

    def to_dict(self) -> dict:
        return self.model_dump(exclude_none=True)


class DeploymentRecord(BaseModel):
    """One deployment as persisted and returned; never carries credentials"""
    model_config = ConfigDict(frozen=True)

    id: str
    spec_url: str
    spec_fingerprint: Optional[str] = None
    port: Optional[int] = None
    base_url: Optional[str] = None
    status: DeploymentStatus
    created_at: datetime
    endpoints: List[str] = Field(default_factory=list)
    failure: Optional[List[Diagnostic]] = None

    def to_dict(self) -> dict:
        return self.model_dump(mode="json")
