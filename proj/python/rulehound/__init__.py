"""Patch-seeded security rule extraction and rule-violation scanning for C code.

The heavy lifting lives in the compiled extension; this package re-exports
the operations most useful from python.
"""

from rulehound._core import (
    ConfigError,
    Corpus,
    ParseError,
    build_detection_prompt,
    cluster_vectors,
    compute_metrics,
    count_tokens,
    estimate_cost,
    extract_functions,
    extract_verdict,
    load_corpus,
    parse_commit_message,
    parse_rule_response,
    render_rule,
    strip_comments_and_strings,
)

__all__ = [
    "ConfigError",
    "Corpus",
    "ParseError",
    "build_detection_prompt",
    "cluster_vectors",
    "compute_metrics",
    "count_tokens",
    "estimate_cost",
    "extract_functions",
    "extract_verdict",
    "load_corpus",
    "parse_commit_message",
    "parse_rule_response",
    "render_rule",
    "strip_comments_and_strings",
]
