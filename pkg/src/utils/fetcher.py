"""
Resource Fetcher

Resolves spec, Quirk and QASM URLs to text. ``http(s)://`` goes through a
shared ``requests`` session, ``file://`` URLs and bare paths are read from
disk. Safe for concurrent use.
"""

import logging
from pathlib import Path
from typing import Optional, Protocol
from urllib.parse import urljoin, urlparse
from urllib.request import url2pathname

import requests

logger = logging.getLogger(__name__)


class FetchError(Exception):
    """Raised when a resource cannot be retrieved"""

    def __init__(self, url: str, message: str):
        super().__init__(f"{url}: {message}")
        self.code = "E_FETCH"
        self.url = url
        self.message = message


class Fetcher(Protocol):
    """Anything that turns a URL into text, raising FetchError on failure"""

    def fetch(self, url: str) -> str: ...


def to_url(location: str) -> str:
    """Turn a local path into a file:// URL; URLs pass through unchanged"""
    if urlparse(location).scheme in ("http", "https", "file"):
        return location
    return Path(location).resolve().as_uri()


def resolve_url(reference: str, base_url: Optional[str]) -> str:
    """Resolve a possibly relative reference against the document's own URL"""
    if urlparse(reference).scheme:
        return reference
    if base_url:
        return urljoin(base_url, reference)
    return to_url(reference)


class ResourceFetcher:
    """Fetch text resources over http(s) or from the local filesystem"""

    def __init__(self, timeout: float = 10.0, session: Optional[requests.Session] = None):
        self.timeout = timeout
        self.session = session or requests.Session()

    def fetch(self, url: str) -> str:
        parsed = urlparse(url)
        logger.debug(f"Fetching {url}")
        if parsed.scheme in ("http", "https"):
            return self._fetch_http(url)
        if parsed.scheme == "file":
            return self._read_file(url, Path(url2pathname(parsed.path)))
        if parsed.scheme == "":
            return self._read_file(url, Path(url))
        raise FetchError(url, f"unsupported URL scheme '{parsed.scheme}'")

    def _fetch_http(self, url: str) -> str:
        # The fragment never reaches the server
        try:
            response = self.session.get(url.split("#", 1)[0], timeout=self.timeout)
        except requests.RequestException as e:
            raise FetchError(url, f"request failed: {e}")
        if response.status_code != 200:
            raise FetchError(url, f"HTTP {response.status_code}")
        response.encoding = response.encoding or "utf-8"
        return response.text

    def _read_file(self, url: str, path: Path) -> str:
        try:
            return path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise FetchError(url, f"cannot read {path}: {e}")
