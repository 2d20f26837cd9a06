"""UMLS REST backend: concept search and one-hop relations.

Talks to the public UTS endpoints (``/search/current`` and
``/content/current/CUI/{cui}/relations``). The API key travels only in the
HTTP call, never in cache descriptors, so cache keys and fixtures are
key-free.
"""

from __future__ import annotations

import time
from typing import Callable

from kgrank import net
from kgrank.errors import KgError, KgNotFoundError
from kgrank.kg.cache import ResponseStore
from kgrank.kg.types import ConceptRef, Triple

DEFAULT_BASE_URL = "https://uts-ws.nlm.nih.gov/rest"
ENV_API_KEY = "KGRANK_UMLS_KEY"
PAGE_SIZE = 100
SEARCH_PAGE_SIZE = 25


def pick_top_hit(rows: list[tuple[float | None, str, str]]) -> tuple[str, str] | None:
    """Choose (id, name) from (score, id, name) rows.

    Backend order is the ranking; explicit score ties break by smallest id.
    """
    if not rows:
        return None
    if any(score is not None for score in (r[0] for r in rows)):
        ranked = sorted(
            rows,
            key=lambda r: (-(r[0] if r[0] is not None else float("-inf")), r[1]),
        )
        return ranked[0][1], ranked[0][2]
    return rows[0][1], rows[0][2]


class UmlsBackend:
    source = "umls"

    def __init__(
        self,
        api_key: str | None = None,
        base_url: str = DEFAULT_BASE_URL,
        page_size: int = PAGE_SIZE,
        http: Callable[..., dict] = net.request_json,
        sleeper: Callable[[float], None] = time.sleep,
    ):
        self.api_key = api_key
        self.base_url = base_url.rstrip("/")
        self.page_size = page_size
        self._http = http
        self._sleeper = sleeper

    # -- concept search ----------------------------------------------------

    def search_descriptor(self, mention: str) -> dict:
        return {
            "source": self.source,
            "op": "search",
            "string": mention,
            "page_size": SEARCH_PAGE_SIZE,
        }

    def map_entity(self, mention: str, store: ResponseStore) -> ConceptRef | None:
        descriptor = self.search_descriptor(mention)

        def fetch() -> dict:
            return self._http(
                "GET",
                f"{self.base_url}/search/current",
                params={
                    "string": mention,
                    "pageSize": SEARCH_PAGE_SIZE,
                    "apiKey": self._require_key(),
                },
                sleeper=self._sleeper,
            )

        response = store.get(descriptor, fetch)
        return self.parse_search(response)

    def parse_search(self, response: dict) -> ConceptRef | None:
        try:
            results = response["result"]["results"]
        except (KeyError, TypeError) as exc:
            raise KgError(f"malformed UMLS search payload: {exc}") from exc
        rows = []
        for item in results:
            ui = item.get("ui", "")
            if not ui or ui == "NONE":
                continue
            score = item.get("score")
            rows.append(
                (float(score) if score is not None else None, ui, item.get("name", ui))
            )
        top = pick_top_hit(rows)
        if top is None:
            return None
        return ConceptRef(id=top[0], preferred_name=top[1], source=self.source)

    # -- one-hop relations --------------------------------------------------

    def relations_descriptor(self, cui: str, page: int) -> dict:
        return {
            "source": self.source,
            "op": "relations",
            "cui": cui,
            "page": page,
            "page_size": self.page_size,
        }

    def one_hop(self, concept: ConceptRef, limit: int, store: ResponseStore) -> list[Triple]:
        triples: list[Triple] = []
        page = 1
        while len(triples) < limit:
            descriptor = self.relations_descriptor(concept.id, page)

            def fetch(page_no: int = page) -> dict:
                try:
                    return self._http(
                        "GET",
                        f"{self.base_url}/content/current/CUI/{concept.id}/relations",
                        params={
                            "pageNumber": page_no,
                            "pageSize": self.page_size,
                            "apiKey": self._require_key(),
                        },
                        sleeper=self._sleeper,
                    )
                except net.HttpStatusError as exc:
                    if exc.status == 404:
                        raise KgNotFoundError(
                            f"UMLS has no concept {concept.id!r}"
                        ) from exc
                    raise

            response = store.get(descriptor, fetch)
            triples.extend(self.parse_relations_page(concept, response))
            page_count = self._page_count(response)
            if page >= page_count:
                break
            page += 1
        return triples[:limit]

    def parse_relations_page(self, concept: ConceptRef, response: dict) -> list[Triple]:
        rows = response.get("result")
        if rows is None:
            raise KgError("malformed UMLS relations payload: no 'result'")
        triples = []
        for row in rows:
            related_id = _last_segment(row.get("relatedId", ""))
            if not related_id or related_id == concept.id:
                continue  # self-loops would put the concept at both endpoints
            relation = row.get("additionalRelationLabel") or row.get("relationLabel") or ""
            if not relation:
                continue
            related = ConceptRef(
                id=related_id,
                preferred_name=row.get("relatedIdName", related_id),
                source=self.source,
            )
            triples.append(
                Triple(head=concept, relation=relation, tail=related, source=self.source)
            )
        return triples

    @staticmethod
    def _page_count(response: dict) -> int:
        try:
            return max(int(response.get("pageCount", 1)), 1)
        except (TypeError, ValueError):
            return 1

    def _require_key(self) -> str:
        if not self.api_key:
            raise KgError(
                f"UMLS API key required for live queries (set {ENV_API_KEY})"
            )
        return self.api_key


def _last_segment(value: str) -> str:
    return value.rstrip("/").rsplit("/", 1)[-1] if value else ""
