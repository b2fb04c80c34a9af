"""Client for paraphrase generation backends.

Two ways to obtain candidates: a live HTTP backend speaking the wire
protocol below, or a precomputed candidates file. The client never filters
or reorders candidates; that is simfilter's job downstream.

Wire protocol:
  POST /generate    {"text": str, "num_return": int, "top_p": float,
                     "max_length": int, "seed": int|null}
            -> 200  {"candidates": [str, ...]}
            -> 4xx/5xx {"error": str}
  GET /health       -> 200 {"status": "ok"}
"""

from __future__ import annotations

import dataclasses
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import httpx

from .errors import ParseError, PipelineError, UnknownId
from .records import TweetRecord
from .simfilter import ParaphraseSet

BACKEND_URL_ENV = "PARAPIPE_BACKEND_URL"


class BackendUnreachable(PipelineError):
    """Transport failure persisting through all retry attempts."""


class ProtocolError(PipelineError):
    """Response that does not follow the wire protocol."""


class BackendError(PipelineError):
    """Failure reported by the backend itself."""


@dataclass(frozen=True)
class GenerationParams:
    num_return: int = 10
    top_p: float = 0.95
    max_length: int = 512
    seed: int | None = None

    def __post_init__(self):
        if self.num_return < 1:
            raise ValueError("num_return must be >= 1")
        if not 0.0 < self.top_p <= 1.0:
            raise ValueError("top_p must lie in (0, 1]")
        if self.max_length < 1:
            raise ValueError("max_length must be >= 1")

    @classmethod
    def from_dict(cls, d: Mapping) -> "GenerationParams":
        known = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def request_body(self, text: str) -> dict:
        return {
            "text": text,
            "num_return": self.num_return,
            "top_p": self.top_p,
            "max_length": self.max_length,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class RetryPolicy:
    attempts: int = 3
    base_delay: float = 0.5  # seconds; doubles per retry

    def __post_init__(self):
        if self.attempts < 1:
            raise ValueError("attempts must be >= 1")
        if self.base_delay < 0:
            raise ValueError("base_delay must be non-negative")

    def delays(self):
        d = self.base_delay
        for _ in range(self.attempts - 1):
            yield d
            d *= 2


@dataclass(frozen=True)
class GenerationResult:
    candidates: tuple
    requested: int

    @property
    def short(self) -> bool:
        return len(self.candidates) < self.requested


def backend_url_from_env(default: str = "http://127.0.0.1:8008") -> str:
    return os.environ.get(BACKEND_URL_ENV, default)


class HttpBackend:
    """Thin wrapper over an httpx client bound to one backend base URL.

    A preconfigured client (e.g. carrying a mock or ASGI transport) can be
    injected for tests; otherwise a real one is created. `sleep` is
    injectable so retry backoff is testable without waiting.
    """

    def __init__(
        self,
        base_url: str | None = None,
        client: httpx.Client | None = None,
        retry: RetryPolicy = RetryPolicy(),
        timeout: float = 30.0,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.base_url = (base_url or backend_url_from_env()).rstrip("/")
        self._client = client or httpx.Client(timeout=timeout)
        self.retry = retry
        self._sleep = sleep

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "HttpBackend":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def check_health(self) -> bool:
        try:
            resp = self._client.get(self.base_url + "/health")
        except httpx.HTTPError:
            return False
        if resp.status_code != 200:
            return False
        try:
            return resp.json().get("status") == "ok"
        except json.JSONDecodeError:
            return False

    def generate(self, text: str, params: GenerationParams) -> GenerationResult:
        """POST one generation request, retrying transport failures and
        5xx responses with exponential backoff. 4xx responses are
        deterministic rejections and are not retried."""
        if not text:
            raise ValueError("text must be non-empty")
        body = params.request_body(text)
        delays = list(self.retry.delays()) + [None]
        last_exc: Exception | None = None
        for delay in delays:
            try:
                resp = self._client.post(self.base_url + "/generate", json=body)
            except httpx.HTTPError as e:
                last_exc = e
                if delay is None:
                    raise BackendUnreachable(
                        f"{self.base_url}/generate unreachable after "
                        f"{self.retry.attempts} attempts: {e}"
                    ) from None
                self._sleep(delay)
                continue
            if resp.status_code == 200:
                return GenerationResult(
                    candidates=_parse_candidates(resp, params),
                    requested=params.num_return,
                )
            message = _error_message(resp)
            if 400 <= resp.status_code < 500:
                raise BackendError(f"backend rejected request ({resp.status_code}): {message}")
            last_exc = BackendError(f"backend failure ({resp.status_code}): {message}")
            if delay is None:
                raise last_exc
            self._sleep(delay)
        raise BackendUnreachable(str(last_exc))  # not reachable; satisfies the type


def _parse_candidates(resp: httpx.Response, params: GenerationParams) -> tuple:
    try:
        payload = resp.json()
    except json.JSONDecodeError:
        raise ProtocolError("200 response body is not JSON") from None
    if not isinstance(payload, dict) or "candidates" not in payload:
        raise ProtocolError('200 response lacks a "candidates" field')
    cands = payload["candidates"]
    if not isinstance(cands, list) or any(not isinstance(c, str) for c in cands):
        raise ProtocolError('"candidates" must be a list of strings')
    if len(cands) > params.num_return:
        raise ProtocolError(
            f"backend returned {len(cands)} candidates for num_return={params.num_return}"
        )
    return tuple(cands)


def _error_message(resp: httpx.Response) -> str:
    try:
        payload = resp.json()
        if isinstance(payload, dict) and isinstance(payload.get("error"), str):
            return payload["error"]
    except json.JSONDecodeError:
        pass
    return resp.text[:200] or "<empty body>"


def generate_paraphrases(
    text: str, params: GenerationParams, backend: HttpBackend
) -> GenerationResult:
    """Candidates for one normalized text, in backend order."""
    return backend.generate(text, params)


@dataclass
class BatchReport:
    requested: int = 0
    generated: int = 0
    skipped: int = 0
    failures: list = field(default_factory=list)  # (record id, error string)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _existing_ids(path: str) -> set:
    ids = set()
    if not os.path.exists(path):
        return ids
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                raise ParseError(f"{path}:{lineno}: bad JSON in existing output") from None
            if "id" not in obj:
                raise ParseError(f"{path}:{lineno}: line lacks an id")
            ids.add(str(obj["id"]))
    return ids


def batch_generate(
    records: Sequence[TweetRecord],
    params: GenerationParams,
    backend: HttpBackend,
    out_path: str,
    concurrency_limit: int = 8,
) -> BatchReport:
    """Generate candidates for every record into a JSONL file.

    Resumable: ids already present in out_path are skipped. Requests run
    concurrently up to the cap, but lines are written strictly in input
    order so reruns produce identical files. Per-record failures go into
    the report; they never abort the batch or produce partial lines.
    """
    if concurrency_limit < 1:
        raise ValueError("concurrency_limit must be >= 1")
    report = BatchReport(requested=len(records))
    done = _existing_ids(out_path)
    todo = [r for r in records if r.id not in done]
    report.skipped = len(records) - len(todo)
    if not todo:
        return report
    with ThreadPoolExecutor(max_workers=concurrency_limit) as pool:
        futures = [pool.submit(backend.generate, r.text, params) for r in todo]
        with open(out_path, "a", encoding="utf-8") as fh:
            for rec, fut in zip(todo, futures):
                try:
                    result = fut.result()
                except PipelineError as e:
                    report.failures.append((rec.id, str(e)))
                    continue
                line = {"id": rec.id, "candidates": list(result.candidates)}
                fh.write(json.dumps(line, sort_keys=True, ensure_ascii=False) + "\n")
                report.generated += 1
    return report


def load_candidates_file(
    path: str,
    records: Sequence[TweetRecord],
    strict: bool = False,
):
    """Read a candidates JSONL file into ParaphraseSet inputs.

    Returns (sets, unknown_ids). Each line's id is matched against the
    source dataset records (the original text is what filtering compares
    against); unmatched ids are reported and excluded, or raise UnknownId
    under strict. Candidate order is preserved verbatim.
    """
    if not os.path.exists(path):
        raise ParseError(f"candidates file not found: {path}")
    by_id = {r.id: r for r in records}
    sets: list[ParaphraseSet] = []
    unknown: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(f"{path}:{lineno}: bad JSON ({e.msg})") from None
            if not isinstance(obj, dict) or "id" not in obj or "candidates" not in obj:
                raise ParseError(f"{path}:{lineno}: need id and candidates fields")
            cands = obj["candidates"]
            if not isinstance(cands, list) or any(not isinstance(c, str) for c in cands):
                raise ParseError(f"{path}:{lineno}: candidates must be a list of strings")
            rid = str(obj["id"])
            if rid not in by_id:
                if strict:
                    raise UnknownId(f"{path}:{lineno}: id {rid!r} not in dataset")
                unknown.append(rid)
                continue
            sets.append(ParaphraseSet.from_texts(by_id[rid], cands))
    return sets, unknown
