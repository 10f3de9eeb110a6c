"""Optional generative path: template retrieval, endpoint translation, and the direct-solve fallback."""
from .bridge import (
    BridgeConfig, BridgeFailed, BridgeMode, BridgeOutcome, FallbackInput, FallbackUnsat, Fragment,
    FragmentRejected, extract_json, generate_fragment, llm_solve, make_transport, parse_fragment,
    solve_request, translate_request,
)
from .knowledge import Template, TemplateStore, chunk_text, cosine, retrieve, step_text, tokens, vectorize
from .transport import (
    LiveTransport, ReplayTransport, TransportError, request_key, write_fixture,
)

__all__ = [
    "BridgeConfig", "BridgeFailed", "BridgeMode", "BridgeOutcome", "FallbackInput", "FallbackUnsat",
    "Fragment", "FragmentRejected", "LiveTransport", "ReplayTransport", "Template", "TemplateStore",
    "TransportError", "chunk_text", "cosine", "extract_json", "generate_fragment", "llm_solve",
    "make_transport", "parse_fragment", "request_key", "retrieve", "solve_request", "step_text",
    "tokens", "translate_request", "vectorize", "write_fixture",
]
