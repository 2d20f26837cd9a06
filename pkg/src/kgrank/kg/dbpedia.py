"""DBpedia backend: entity lookup plus SPARQL one-hop retrieval.

SPARQL result sets carry no meaningful order, so parsed triples are sorted
lexicographically by (relation, other endpoint name) to make retrieval
deterministic for a fixed response.
"""

from __future__ import annotations

import re
import time
from typing import Callable

from kgrank import net
from kgrank.errors import KgError
from kgrank.kg.cache import ResponseStore
from kgrank.kg.types import ConceptRef, Triple
from kgrank.kg.umls import pick_top_hit

DEFAULT_LOOKUP_URL = "https://lookup.dbpedia.org/api/search"
DEFAULT_SPARQL_URL = "https://dbpedia.org/sparql"

_TAG = re.compile(r"</?B>", re.IGNORECASE)

ONE_HOP_QUERY = """\
SELECT DISTINCT ?dir ?p ?other ?label WHERE {{
  {{ <{resource}> ?p ?other . BIND("out" AS ?dir) }}
  UNION
  {{ ?other ?p <{resource}> . BIND("in" AS ?dir) }}
  FILTER(isIRI(?other))
  OPTIONAL {{ ?other rdfs:label ?label . FILTER(langMatches(lang(?label), "en")) }}
}}
ORDER BY ?dir ?p ?other
LIMIT {limit}
"""


class DbpediaBackend:
    source = "dbpedia"

    def __init__(
        self,
        lookup_url: str = DEFAULT_LOOKUP_URL,
        sparql_url: str = DEFAULT_SPARQL_URL,
        http: Callable[..., dict] = net.request_json,
        sleeper: Callable[[float], None] = time.sleep,
    ):
        self.lookup_url = lookup_url
        self.sparql_url = sparql_url
        self._http = http
        self._sleeper = sleeper

    # -- entity lookup -------------------------------------------------------

    def search_descriptor(self, mention: str) -> dict:
        return {"source": self.source, "op": "search", "string": mention, "max_results": 10}

    def map_entity(self, mention: str, store: ResponseStore) -> ConceptRef | None:
        descriptor = self.search_descriptor(mention)

        def fetch() -> dict:
            return self._http(
                "GET",
                self.lookup_url,
                params={"query": mention, "format": "JSON", "maxResults": 10},
                headers={"Accept": "application/json"},
                sleeper=self._sleeper,
            )

        return self.parse_search(store.get(descriptor, fetch))

    def parse_search(self, response: dict) -> ConceptRef | None:
        docs = response.get("docs")
        if docs is None:
            raise KgError("malformed DBpedia lookup payload: no 'docs'")
        rows = []
        for doc in docs:
            resources = doc.get("resource") or []
            if not resources:
                continue
            iri = resources[0]
            labels = doc.get("label") or []
            name = _TAG.sub("", labels[0]) if labels else _local_name(iri)
            scores = doc.get("score") or []
            score = float(scores[0]) if scores else None
            rows.append((score, iri, name))
        top = pick_top_hit(rows)
        if top is None:
            return None
        return ConceptRef(id=top[0], preferred_name=top[1], source=self.source)

    # -- one-hop relations ----------------------------------------------------

    def one_hop_descriptor(self, resource: str, limit: int) -> dict:
        return {"source": self.source, "op": "one_hop", "resource": resource, "limit": limit}

    def one_hop(self, concept: ConceptRef, limit: int, store: ResponseStore) -> list[Triple]:
        descriptor = self.one_hop_descriptor(concept.id, limit)
        query = ONE_HOP_QUERY.format(resource=concept.id, limit=limit)

        def fetch() -> dict:
            return self._http(
                "GET",
                self.sparql_url,
                params={"query": query, "format": "application/sparql-results+json"},
                sleeper=self._sleeper,
            )

        triples = self.parse_one_hop(concept, store.get(descriptor, fetch))

        def other_name(t: Triple) -> str:
            other = t.tail if t.head.id == concept.id else t.head
            return other.preferred_name

        triples.sort(key=lambda t: (t.relation, other_name(t)))
        return triples[:limit]

    def parse_one_hop(self, concept: ConceptRef, response: dict) -> list[Triple]:
        try:
            bindings = response["results"]["bindings"]
        except (KeyError, TypeError) as exc:
            raise KgError(f"malformed SPARQL payload: {exc}") from exc
        triples = []
        for row in bindings:
            try:
                direction = row["dir"]["value"]
                predicate = row["p"]["value"]
                other_iri = row["other"]["value"]
            except (KeyError, TypeError):
                continue
            if other_iri == concept.id:
                continue
            label = row.get("label", {}).get("value") if isinstance(row.get("label"), dict) else None
            other = ConceptRef(
                id=other_iri,
                preferred_name=label or _local_name(other_iri),
                source=self.source,
            )
            relation = _local_name(predicate)
            if not relation:
                continue
            if direction == "in":
                triples.append(Triple(head=other, relation=relation, tail=concept, source=self.source))
            else:
                triples.append(Triple(head=concept, relation=relation, tail=other, source=self.source))
        return triples


def _local_name(iri: str) -> str:
    tail = re.split(r"[/#]", iri.rstrip("/"))[-1]
    return tail.replace("_", " ")
