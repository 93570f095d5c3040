"""Independent brute-force oracles, re-derived from first principles.

Nothing here calls into the library's traversal or graph code: traversals
are recomputed straight from reply_to fields, and graph statistics by
exhaustive enumeration of node pairs and triples. Unit and acceptance
tests compare library output against these.
"""

from itertools import combinations, permutations


def _key(utt):
    if utt.timestamp is None:
        return (1, 0, utt.id)
    return (0, utt.timestamp, utt.id)


def _children_of(utterances):
    children = {}
    for utt in utterances:
        if utt.reply_to is not None:
            children.setdefault(utt.reply_to, []).append(utt)
    for kids in children.values():
        kids.sort(key=_key)
    return children


def _root_of(utterances):
    roots = [u for u in utterances if u.reply_to is None]
    assert len(roots) == 1
    return roots[0]


def ref_bfs(utterances):
    children = _children_of(utterances)
    order = [_root_of(utterances)]
    i = 0
    while i < len(order):
        order.extend(children.get(order[i].id, []))
        i += 1
    return order


def ref_dfs(utterances, postorder: bool):
    children = _children_of(utterances)
    out = []

    def visit(utt):
        if not postorder:
            out.append(utt)
        for child in children.get(utt.id, []):
            visit(child)
        if postorder:
            out.append(utt)

    visit(_root_of(utterances))
    return out


def ref_reciprocity(nodes, edges) -> float:
    """edges: set of (source, target) ordered pairs; self-loops ignored."""
    edges = {(s, t) for (s, t) in edges if s != t}
    any_link = 0
    mutual = 0
    for s, t in combinations(sorted(nodes), 2):
        forward = (s, t) in edges
        backward = (t, s) in edges
        if forward or backward:
            any_link += 1
        if forward and backward:
            mutual += 1
    return mutual / any_link if any_link else 0.0


def ref_motifs(nodes, edges) -> dict:
    edges = {(s, t) for (s, t) in edges if s != t}
    nodes = sorted(nodes)
    dyadic = sum(
        1 for s, t in combinations(nodes, 2) if (s, t) in edges and (t, s) in edges
    )
    out_star = 0
    in_star = 0
    for s in nodes:
        for t, r in combinations([n for n in nodes if n != s], 2):
            if (s, t) in edges and (s, r) in edges:
                out_star += 1
            if (t, s) in edges and (r, s) in edges:
                in_star += 1
    transitive = sum(
        1
        for s, t, r in permutations(nodes, 3)
        if (s, t) in edges and (t, r) in edges and (s, r) in edges
    )
    return {
        "motif_dyadic": dyadic,
        "motif_outgoing_star": out_star,
        "motif_incoming_star": in_star,
        "motif_transitive": transitive,
    }
