"""IRI namespaces shared by the ontology, translator and KG files."""

DUL = "http://www.ontologydesignpatterns.org/ont/dul/DUL.owl#"
USD = "https://w3id.org/usdkg/usd#"
USDT = "https://w3id.org/usdkg/usd-datatypes#"
BOX = "https://w3id.org/usdkg/box#"
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"

DEFAULT_BASE = "http://example.org/scene"

DEFAULT_PREFIXES = {
    "dul": DUL,
    "usd": USD,
    "usdt": USDT,
    "box": BOX,
}


def local_name(iri: str) -> str:
    """Text after the last ``#`` or ``/``."""
    cut = max(iri.rfind("#"), iri.rfind("/"))
    return iri[cut + 1:]


def is_iri(text: str) -> bool:
    scheme, sep, rest = text.partition(":")
    return bool(sep and rest and scheme and scheme[0].isalpha()
                and all(c.isalnum() or c in "+-." for c in scheme)
                and not any(c in text for c in ' <>"{}|\\^`\n\t'))
