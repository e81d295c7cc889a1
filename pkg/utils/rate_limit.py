"""
Simple in-memory rate limiter for the compute endpoints.

Limits requests per client and path so a runaway script cannot queue up
hundreds of classifier or Monte Carlo jobs.
"""
import time
from collections import defaultdict

from fastapi import HTTPException, Request


class RateLimiter:
    """
    Sliding-window rate limiter keyed by client IP + path.

    Parameters:
        max_requests: Maximum number of requests in the window.
        window_seconds: Time window in seconds.
    """

    def __init__(self, max_requests: int = 10, window_seconds: float = 60.0) -> None:
        self.max_requests = max_requests
        self.window_seconds = window_seconds
        # key -> list of request timestamps
        self._requests: dict[str, list[float]] = defaultdict(list)

    def _cleanup(self, key: str) -> None:
        cutoff = time.monotonic() - self.window_seconds
        self._requests[key] = [t for t in self._requests[key] if t > cutoff]

    def check(self, key: str) -> None:
        """Raises HTTPException(429) if the limit for ``key`` is exceeded."""
        self._cleanup(key)
        if len(self._requests[key]) >= self.max_requests:
            raise HTTPException(
                status_code=429,
                detail=(
                    f"Zu viele Anfragen. Maximal {self.max_requests} "
                    f"Requests pro {self.window_seconds:.0f} Sekunden erlaubt."
                ),
            )
        self._requests[key].append(time.monotonic())

    def reset(self) -> None:
        self._requests.clear()


# curve / classify / minimize: 30 requests per minute
compute_rate_limiter = RateLimiter(max_requests=30, window_seconds=60.0)

# Monte Carlo starts: 5 per minute
mc_rate_limiter = RateLimiter(max_requests=5, window_seconds=60.0)


def _key(request: Request) -> str:
    client_ip = request.client.host if request.client else "unknown"
    return f"{client_ip}:{request.url.path}"


async def check_compute_rate_limit(request: Request) -> None:
    """FastAPI dependency for the synchronous compute endpoints."""
    compute_rate_limiter.check(_key(request))


async def check_mc_rate_limit(request: Request) -> None:
    """FastAPI dependency for Monte Carlo starts."""
    mc_rate_limiter.check(_key(request))
