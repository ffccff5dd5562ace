"""Response helpers shared by the workbench tools"""
import json
import logging
from typing import Any, Dict, List, Tuple

from app.utils.errors import log_and_return_error
from app.utils.logging import get_correlation_id
from app.utils.serialization import to_jsonable

logger = logging.getLogger(__name__)

# Token limits
TOKEN_LIMIT = 25000
TOKEN_WARNING_THRESHOLD = 20000


class ResponseSizeManager:
    """Keep tool responses inside the client's token budget"""

    @staticmethod
    def estimate_token_count(text: str) -> int:
        """Rough estimate: 1 token is about 4 characters"""
        return len(text) // 4

    @staticmethod
    def check_response_size(response: Dict[str, Any]) -> Dict[str, Any]:
        """Attach size metadata, plus a warning near the limit"""
        text = json.dumps(response)
        tokens = ResponseSizeManager.estimate_token_count(text)
        meta = response.setdefault("_metadata", {})
        meta["estimated_tokens"] = tokens
        meta["response_size_bytes"] = len(text)
        if tokens > TOKEN_WARNING_THRESHOLD:
            meta["size_warning"] = {
                "message": f"Response size ({tokens} tokens) is approaching the limit ({TOKEN_LIMIT} tokens)",
                "recommendations": ["Use fewer k_steps", "Request a narrower ell range"],
            }
            logger.warning(f"Response size warning: {tokens} tokens")
        return response

    @staticmethod
    def thin_samples(values: List[Any], max_items: int) -> Tuple[List[Any], bool]:
        """Keep every n-th sample (always the last) so at most max_items remain"""
        if max_items <= 0 or len(values) <= max_items:
            return list(values), False
        stride = -(-len(values) // max_items)
        kept = list(values[::stride])
        if (len(values) - 1) % stride:
            kept[-1] = values[-1]
        return kept, True


def format_success_response(payload: Dict[str, Any]) -> str:
    """JSON success response with size metadata"""
    response = {"success": True, **to_jsonable(payload)}
    response = ResponseSizeManager.check_response_size(response)
    response["_metadata"]["correlation_id"] = get_correlation_id()
    return json.dumps(response, indent=2)


def format_error_response(error: Exception, operation: str, **context: Any) -> str:
    return log_and_return_error(error, operation, context=context or None, log_level="warning")
