"""Tracking-redirector resolution and URL normalization.

Some engines wrap result links in a redirector URL that carries the real
target in a query parameter. Those must be unwrapped before dedup, and
unwrappable ones must stay visible: they are flagged so the run ledger can
count them instead of silently dropping results.

Normalization defines URL equality for dedup: two results are "the same
document" iff their normalized URLs are byte-equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from urllib.parse import parse_qs, urlsplit, urlunsplit

_DEFAULT_PORTS = {"http": "80", "https": "443"}

# RFC 3986 unreserved characters; escapes of these are decoded, all other
# escapes are kept but upper-cased.
_UNRESERVED = set(
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-._~"
)
_HEX = "0123456789ABCDEFabcdef"

# Characters allowed to stand unencoded inside path / query / fragment
# components (pchar plus "/" and "?").
_COMPONENT_SAFE = _UNRESERVED | set(":@!$&'()*+,;=/?")


class UrlError(ValueError):
    pass


@dataclass(frozen=True)
class TrackingPattern:
    """A redirector host plus the query parameter holding the real target.

    ``host`` matches the redirector's hostname (case-insensitive, exact);
    ``param`` names the parameter whose (percent-decoded) value is the
    destination URL. ``path_prefix`` optionally narrows the match.
    """

    host: str
    param: str
    path_prefix: str = ""


def _canonical_escapes(component: str) -> str:
    """Decode escapes of unreserved chars, upper-case the rest, and
    percent-encode anything that may not appear literally."""
    out: list[str] = []
    i = 0
    n = len(component)
    while i < n:
        ch = component[i]
        if ch == "%":
            if i + 2 <= n - 1 and component[i + 1] in _HEX and component[i + 2] in _HEX:
                decoded = chr(int(component[i + 1 : i + 3], 16))
                if decoded in _UNRESERVED:
                    out.append(decoded)
                else:
                    out.append("%" + component[i + 1 : i + 3].upper())
                i += 3
                continue
            # Bare "%" not starting a valid escape: encode it.
            out.append("%25")
            i += 1
            continue
        if ch in _COMPONENT_SAFE:
            out.append(ch)
        else:
            out.append("".join(f"%{b:02X}" for b in ch.encode("utf-8")))
        i += 1
    return "".join(out)


def normalize_url(url: str) -> str:
    """Canonical form used for dedup.

    Rules: lower-case scheme and host, strip default ports, drop the
    fragment, make the empty path "/", canonicalize percent-escapes in
    path and query, otherwise preserve the query string as-is.
    """
    if not isinstance(url, str) or not url.strip():
        raise UrlError("empty URL")
    parts = urlsplit(url.strip())
    scheme = parts.scheme.lower()
    if scheme not in ("http", "https"):
        raise UrlError(f"unsupported scheme in {url!r}")
    host = (parts.hostname or "").lower()
    if not host:
        raise UrlError(f"no host in {url!r}")
    try:
        port = parts.port
    except ValueError as exc:
        raise UrlError(f"invalid port in {url!r}") from exc

    netloc = host
    if port is not None and str(port) != _DEFAULT_PORTS.get(scheme):
        netloc = f"{host}:{port}"
    if parts.username:
        userinfo = parts.username + (f":{parts.password}" if parts.password else "")
        netloc = f"{userinfo}@{netloc}"

    path = _canonical_escapes(parts.path) or "/"
    query = _canonical_escapes(parts.query)
    return urlunsplit((scheme, netloc, path, query, ""))


def resolve_url(raw_url: str, patterns: list[TrackingPattern] | None = None) -> str | None:
    """Unwrap a tracking redirector; pass anything else through unchanged.

    Returns None when the URL matches a redirector pattern but the target
    cannot be recovered (missing parameter, undecodable or non-HTTP
    target). Callers must count those, never drop them silently.
    """
    patterns = patterns or []
    try:
        parts = urlsplit(raw_url.strip())
    except ValueError:
        return None
    host = (parts.hostname or "").lower()

    for pattern in patterns:
        if host != pattern.host.lower():
            continue
        if pattern.path_prefix and not parts.path.startswith(pattern.path_prefix):
            continue
        # parse_qs percent-decodes values, so the target comes out unwrapped.
        params = parse_qs(parts.query, keep_blank_values=True)
        values = params.get(pattern.param)
        if not values or not values[0]:
            return None
        target = values[0]
        target_parts = urlsplit(target)
        if target_parts.scheme in ("http", "https") and target_parts.netloc:
            return target
        return None
    return raw_url
