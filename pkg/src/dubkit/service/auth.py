"""Opaque bearer-token authentication.

Tokens map to user ids; a subset of tokens carries admin rights.  There is
no account system: token distribution happens out of band.
"""

from __future__ import annotations

import json
from pathlib import Path

from dubkit.service.store import ServiceError


class Unauthenticated(ServiceError):
    status = 401


class Forbidden(ServiceError):
    status = 403


class TokenAuth:
    def __init__(self, tokens: dict[str, str], admin_tokens: set[str] | None = None):
        self._tokens = dict(tokens)
        self._admin_tokens = set(admin_tokens or ())
        unknown_admin = self._admin_tokens - set(self._tokens)
        if unknown_admin:
            raise ValueError("admin tokens must also appear in the token map")

    @classmethod
    def from_file(cls, path: str | Path) -> "TokenAuth":
        """JSON shape: {"tokens": {token: user_id}, "admin_tokens": [token]}."""
        doc = json.loads(Path(path).read_text("utf-8"))
        return cls(doc.get("tokens", {}), set(doc.get("admin_tokens", [])))

    def authenticate(self, authorization: str | None) -> str:
        """Resolve an ``Authorization: Bearer <token>`` header to a user id."""
        if not authorization:
            raise Unauthenticated("missing Authorization header")
        scheme, _, token = authorization.partition(" ")
        if scheme.lower() != "bearer" or not token.strip():
            raise Unauthenticated("expected 'Bearer <token>'")
        user_id = self._tokens.get(token.strip())
        if user_id is None:
            raise Unauthenticated("unknown token")
        return user_id

    def require_admin(self, authorization: str | None) -> str:
        user_id = self.authenticate(authorization)
        _, _, token = (authorization or "").partition(" ")
        if token.strip() not in self._admin_tokens:
            raise Forbidden("admin token required")
        return user_id
