"""HTTP facade over the backends, matching the scoring pipeline's
service contracts:

  POST /translate {"text", "src", "tgt"}  -> {"text": "..."}
  POST /embed     {"texts": [...]}        -> {"model_id", "vectors"}

Errors come back as {"code", "message"} with status 400.
"""

from __future__ import annotations

from typing import Any

from .backends import EmbeddingBackend, TranslationBackend
from .errors import AdapterError

__all__ = ["create_app"]


def create_app(translator: TranslationBackend, embedder: EmbeddingBackend) -> Any:
    from fastapi import Body, FastAPI
    from fastapi.responses import JSONResponse

    app = FastAPI(title="model adapter service")

    def bad_request(exc: Exception) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"code": type(exc).__name__, "message": str(exc)},
        )

    @app.get("/health")
    def health() -> dict[str, Any]:
        return {"ok": True}

    @app.post("/translate")
    def translate(body: dict = Body(...)) -> Any:
        text, src, tgt = body.get("text"), body.get("src"), body.get("tgt")
        if not (isinstance(text, str) and isinstance(src, str) and isinstance(tgt, str)):
            return bad_request(AdapterError("body must carry text, src and tgt strings"))
        try:
            return {"text": translator.translate(text, src, tgt)}
        except AdapterError as exc:
            return bad_request(exc)

    @app.post("/embed")
    def embed(body: dict = Body(...)) -> Any:
        texts = body.get("texts")
        if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
            return bad_request(AdapterError("body must carry a list of texts"))
        try:
            vectors = embedder.embed_batch(texts)
        except AdapterError as exc:
            return bad_request(exc)
        return {"model_id": embedder.model_id, "vectors": [list(v) for v in vectors]}

    return app
