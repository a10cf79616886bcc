#!/usr/bin/env python3
"""Generate the synthetic evaluation corpus under fixtures/corpus.

Four small apps, each with an old and a new homepage. Five target pairs per
app. Three pairs carry change patterns that defeat weighted similarity
ranking (caption synonym, tag swap, id churn); the rest survive ordinary
edits such as a moved element or a renamed class.

The generator re-scores every pair with its own copy of the default weights
and refuses to write a corpus whose failures differ from the intended ones.
"""

import argparse
import copy
import json
import math
import os
import re
import sys

WEIGHTS = {
    "tag": 0.5, "text": 1.5, "class": 0.5, "id": 1.5, "name": 1.5, "href": 0.5,
    "alt": 0.5, "is_button": 0.5, "xpath": 0.5, "id_xpath": 0.5, "location": 0.5,
    "area": 0.5, "shape": 0.5, "neighbor_text": 1.5,
}
COMPARATOR = {
    "tag": "exact", "is_button": "exact", "neighbor_text": "words", "location": "point",
    "area": "ratio", "shape": "ratio",
}
STRING_KEYS = ["tag", "text", "class", "id", "name", "href", "alt", "is_button", "xpath",
               "id_xpath", "shape", "neighbor_text"]
THRESHOLD = 0.85
TOP_K = 10


def levenshtein(a, b):
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def compare(kind, a, b):
    if kind == "exact":
        return 1.0 if a.lower() == b.lower() else 0.0
    if kind == "words":
        wa = set(re.findall(r"[a-z0-9]+", a.lower()))
        wb = set(re.findall(r"[a-z0-9]+", b.lower()))
        if not wa and not wb:
            return 1.0
        return len(wa & wb) / len(wa | wb)
    if kind == "point":
        ax, ay = map(float, a.split(","))
        bx, by = map(float, b.split(","))
        return max(0.0, 1.0 - math.hypot(ax - bx, ay - by) / 100.0)
    if kind == "ratio":
        va, vb = float(a), float(b)
        if va == 0 and vb == 0:
            return 1.0
        return min(va, vb) / max(va, vb)
    longest = max(len(a), len(b))
    return 1.0 if longest == 0 else 1.0 - levenshtein(a, b) / longest


def score(target, candidate):
    total = 0.0
    for key, weight in WEIGHTS.items():
        best = 0.0
        for a in target.get(key, []):
            for b in candidate.get(key, []):
                best = max(best, compare(COMPARATOR.get(key, "string"), a, b))
        total += weight * best
    return total


def rect(node):
    return node["x"], node["y"], node["w"], node["h"]


def related(a, b):
    ax, ay, aw, ah = rect(a)
    bx, by, bw, bh = rect(b)
    iw = max(0, min(ax + aw, bx + bw) - max(ax, bx))
    ih = max(0, min(ay + ah, by + bh) - max(ay, by))
    inter = iw * ih
    union = aw * ah + bw * bh - inter
    if union == 0 or inter / union <= THRESHOLD:
        return False

    def contains(r, c):
        cx, cy = c[0] + c[2] / 2, c[1] + c[3] / 2
        return r[0] <= cx <= r[0] + r[2] and r[1] <= cy <= r[1] + r[3]

    return contains(rect(a), rect(b)) and contains(rect(b), rect(a))


def merge(nodes):
    parent = list(range(len(nodes)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            if related(nodes[i], nodes[j]):
                ri, rj = find(i), find(j)
                parent[max(ri, rj)] = min(ri, rj)
    groups = {}
    for i in range(len(nodes)):
        groups.setdefault(find(i), []).append(nodes[i])
    elements = []
    for widget_id, root in enumerate(sorted(groups)):
        values = {}
        for node in groups[root]:
            for key, value in properties(node).items():
                values.setdefault(key, [])
                if value not in values[key]:
                    values[key].append(value)
        elements.append({"widget_id": widget_id, "values": values,
                         "xpaths": [n["xpath"] for n in groups[root]]})
    return elements


def properties(node):
    out = {k: node[k] for k in STRING_KEYS if node.get(k)}
    out["location"] = f'{node["x"]},{node["y"]}'
    out["area"] = str(node["w"] * node["h"])
    return out


# --- page construction -----------------------------------------------------

def element(key, tag, xpath, x, y, w, h, **props):
    node = {"key": key, "tag": tag, "xpath": xpath, "x": x, "y": y, "w": w, "h": h}
    node.update(props)
    node.setdefault("is_button", "yes" if tag == "button" else "no")
    node.setdefault("shape", str(round(100 * w / h)) if h else "0")
    return node


def header(app, links, search_id):
    nodes = [element("logo", "img", "/html/body/header/a/img", 20, 12, 120, 40,
                     alt=f"{app} logo", **{"class": "logo"})]
    for i, text in enumerate(links):
        slug = text.lower().replace(" ", "-")
        nodes.append(element(f"nav_{slug}", "a", f"/html/body/header/nav/a[{i + 1}]",
                             200 + 110 * i, 20, 96, 24, text=text,
                             href=f"https://{app}.example/{slug}", **{"class": "nav-link"}))
    # Search box: a wrapper div and the input it holds occupy the same area.
    nodes.append(element("search_wrap", "div", "/html/body/header/div[2]", 760, 16, 260, 32,
                         id=f"{app}-sb", **{"class": "search-box"}))
    nodes.append(element("search", "input", "/html/body/header/div[2]/input", 760, 16, 260, 32,
                         id=search_id, name="q"))
    return nodes


def footer(app, links):
    nodes = []
    for i, text in enumerate(links):
        slug = text.lower().replace(" ", "-")
        # Each footer link sits inside a span slightly larger than itself.
        nodes.append(element(f"foot_{slug}_span", "span", f"/html/body/footer/ul/li[{i + 1}]/span",
                             100 + 160 * i, 940, 140, 30, **{"class": "foot-item"}))
        nodes.append(element(f"foot_{slug}", "a", f"/html/body/footer/ul/li[{i + 1}]/span/a",
                             101 + 160 * i, 941, 138, 28, text=text,
                             href=f"https://{app}.example/{slug}"))
    return nodes


def fill_neighbors(nodes):
    """neighbor_text: visible text of the nearest elements, nearest first."""
    def center(n):
        return n["x"] + n["w"] / 2, n["y"] + n["h"] / 2

    for node in nodes:
        if "neighbor_text" in node:
            continue
        cx, cy = center(node)
        near = []
        for other in nodes:
            if other is node or not other.get("text"):
                continue
            ox, oy = center(other)
            d = math.hypot(cx - ox, cy - oy)
            if d <= 260:
                near.append((d, other["document_index"], other["text"]))
        near.sort()
        words = " ".join(t for _, _, t in near[:4]).lower()
        if words:
            node["neighbor_text"] = words


def finish(nodes):
    for i, node in enumerate(nodes):
        node["document_index"] = i
    fill_neighbors(nodes)
    return nodes


def by_key(nodes, key):
    for n in nodes:
        if n["key"] == key:
            return n
    raise KeyError(key)


def apply_changes(nodes, changes):
    new = copy.deepcopy(nodes)
    for n in new:
        n.pop("document_index", None)
        n.pop("neighbor_text", None)
    for key, override in changes.get("modify", {}).items():
        node = by_key(new, key)
        for field, value in override.items():
            if value is None:
                node.pop(field, None)
            else:
                node[field] = value
        if "w" in override or "h" in override:
            node["shape"] = str(round(100 * node["w"] / node["h"]))
    for key in changes.get("remove", []):
        new.remove(by_key(new, key))
    for position, node in changes.get("insert", []):
        new.insert(position, node)
    return finish(new)


# --- the four apps -----------------------------------------------------------

def app_shop():
    old = header("shop", ["Home", "Deals", "Pricing", "Help"], "search") + [
        element("cart_title", "h2", "/html/body/main/section[2]/h2", 100, 520, 300, 30,
                text="Cart summary"),
        element("cart_save", "button", "/html/body/main/section[2]/form/button[1]",
                100, 600, 96, 36, text="Save", **{"class": "btn btn-primary"}),
        element("cart_checkout", "button", "/html/body/main/section[2]/form/button[2]",
                220, 600, 120, 36, text="Checkout", id="checkout", **{"class": "btn"}),
        element("promo", "input", "/html/body/main/section[2]/form/input", 100, 660, 240, 30,
                name="promo_code", id="promo"),
        element("settings_title", "h3", "/html/body/aside/h3", 640, 480, 200, 28,
                text="Account settings"),
        element("settings_save", "button", "/html/body/aside/form/button", 640, 620, 96, 36,
                text="Update", **{"class": "btn btn-secondary"}),
    ] + footer("shop", ["About", "Careers", "Contact"])
    old = finish(old)
    new = apply_changes(old, {
        "modify": {
            # Caption synonym: the cart button now reads "Store" and sits in
            # a new wrapper further down the page.
            "cart_save": {"text": "Store", "xpath": "/html/body/main/section[3]/div/form/button[1]",
                          "y": 760},
            "cart_checkout": {"xpath": "/html/body/main/section[3]/div/form/button[2]", "y": 760},
            "promo": {"xpath": "/html/body/main/section[3]/div/form/input", "y": 820},
            "cart_title": {"xpath": "/html/body/main/section[3]/h2", "y": 680},
            # The settings panel button is renamed to "Save" and lands
            # where the cart button used to be.
            "settings_save": {"text": "Save", "class": "btn btn-primary", "x": 120, "y": 610,
                              "xpath": "/html/body/main/section[2]/form/button"},
            "settings_title": {"x": 100, "y": 540, "xpath": "/html/body/main/section[2]/h3"},
            # Ordinary edits that similarity ranking survives.
            "nav_pricing": {"x": 420, "class": "nav-link nav-link--accent"},
            "search": {"id": "search-input"},
        },
    })
    pairs = [
        ("shop-01", "search", "von_search"),
        ("shop-02", "nav_pricing", "moved_link"),
        ("shop-03", "cart_save", "caption_synonym"),
        ("shop-04", "foot_careers", "footer_link"),
        ("shop-05", "cart_checkout", "moved_button"),
    ]
    return old, new, pairs


def app_news():
    old = header("news", ["World", "Business", "Science", "Sport"], "q") + [
        element("headline", "a", "/html/body/main/article[1]/h1/a", 100, 140, 600, 40,
                text="Markets rally after rate decision", href="https://news.example/markets"),
        element("byline", "span", "/html/body/main/article[1]/p/span", 100, 190, 200, 20,
                text="By staff reporter", **{"class": "byline"}),
        element("newsletter_title", "h3", "/html/body/aside/form/h3", 640, 500, 240, 26,
                text="Newsletter"),
        element("newsletter_email", "input", "/html/body/aside/form/input[1]", 640, 540, 220, 30,
                name="email", id="nl-email", **{"class": "field"}),
        element("newsletter_go", "input", "/html/body/aside/form/input[2]", 640, 580, 110, 32,
                name="subscribe", id="nl-submit", is_button="yes", **{"class": "cta"}),
        element("more", "button", "/html/body/main/button", 100, 420, 140, 36, text="More stories",
                id="more", **{"class": "btn-more"}),
    ] + footer("news", ["About", "Privacy", "Terms"])
    old = finish(old)
    new = apply_changes(old, {
        "modify": {
            # Tag swap: the submit input becomes a button with visible text,
            # loses its name and id, and moves to the right of the field.
            "newsletter_go": {"tag": "button", "text": "Subscribe", "name": None, "id": None,
                              "class": "cta cta-wide", "x": 880, "y": 540, "w": 130, "h": 30,
                              "xpath": "/html/body/aside/div/form/button"},
            # The email field takes over the old control's name and place.
            "newsletter_email": {"name": "subscribe", "id": "nl-submit-email", "class": "cta",
                                 "y": 580, "w": 200,
                                 "xpath": "/html/body/aside/div/form/input"},
            "newsletter_title": {"xpath": "/html/body/aside/div/form/h3"},
            "headline": {"text": "Markets rally after central bank decision"},
            "more": {"y": 470, "xpath": "/html/body/main/div/button"},
        },
    })
    pairs = [
        ("news-01", "headline", "text_edit"),
        ("news-02", "newsletter_go", "tag_swap"),
        ("news-03", "more", "moved_button"),
        ("news-04", "nav_science", "unchanged_link"),
        ("news-05", "logo", "image_alt"),
    ]
    return old, new, pairs


def app_bank():
    old = header("bank", ["Accounts", "Cards", "Loans", "Support"], "bank-q") + [
        element("transfer", "button", "/html/body/main/div[1]/button[1]", 100, 200, 140, 40,
                text="Transfer", id="btn-4821", name="action", **{"class": "tile-btn"}),
        element("pay", "button", "/html/body/main/div[1]/button[2]", 260, 200, 140, 40,
                text="Pay bills", id="btn-4822", name="action", **{"class": "tile-btn"}),
        element("statements", "button", "/html/body/main/div[1]/button[3]", 420, 200, 140, 40,
                text="Statements", id="btn-4823", name="action", **{"class": "tile-btn"}),
        element("login_wrap", "div", "/html/body/main/form/div", 640, 300, 200, 36,
                **{"class": "login-field"}),
        element("login_user", "input", "/html/body/main/form/div/input", 642, 302, 196, 32,
                id="user", name="username"),
        element("login_go", "button", "/html/body/main/form/button", 640, 350, 120, 36,
                text="Sign in", id="signin", **{"class": "btn"}),
    ] + footer("bank", ["Security", "Rates", "Branches"])
    old = finish(old)
    new = apply_changes(old, {
        "modify": {
            # Id churn: generated ids shifted by one tile, the transfer tile
            # was relabelled and moved to the end of the row.
            "transfer": {"text": "Send money", "id": "btn-4824", "x": 420,
                         "xpath": "/html/body/main/div[1]/button[3]"},
            "pay": {"id": "btn-4821", "x": 100, "xpath": "/html/body/main/div[1]/button[1]"},
            "statements": {"id": "btn-4822", "x": 260, "xpath": "/html/body/main/div[1]/button[2]"},
            "login_go": {"text": "Log in"},
            "nav_cards": {"href": "https://bank.example/cards-and-wallets"},
        },
    })
    pairs = [
        ("bank-01", "transfer", "id_churn"),
        ("bank-02", "login_user", "von_field"),
        ("bank-03", "login_go", "caption_edit"),
        ("bank-04", "nav_cards", "href_edit"),
        ("bank-05", "foot_rates", "footer_link"),
    ]
    return old, new, pairs


def app_forum():
    old = header("forum", ["Latest", "Top", "Categories", "Groups"], "forum-search") + [
        element("new_topic", "button", "/html/body/main/div/button", 100, 120, 150, 36,
                text="New topic", id="create-topic", **{"class": "btn btn-primary"}),
        element("topic1", "a", "/html/body/main/table/tbody/tr[1]/td/a", 100, 200, 500, 24,
                text="Welcome to the community", href="https://forum.example/t/1"),
        element("topic2", "a", "/html/body/main/table/tbody/tr[2]/td/a", 100, 240, 500, 24,
                text="Release notes", href="https://forum.example/t/2"),
        element("topic3", "a", "/html/body/main/table/tbody/tr[3]/td/a", 100, 280, 500, 24,
                text="Feature requests", href="https://forum.example/t/3"),
        element("avatar", "img", "/html/body/header/div[3]/img", 1060, 14, 36, 36,
                alt="profile picture", id="avatar"),
    ] + footer("forum", ["Guidelines", "FAQ", "Privacy"])
    old = finish(old)
    pinned = element("pinned", "a", "/html/body/main/table/tbody/tr[1]/td/a", 100, 200, 500, 24,
                     text="Pinned: read before posting", href="https://forum.example/t/0")
    new = apply_changes(old, {
        "modify": {
            # Moved element: the new-topic button jumps to the sidebar.
            "new_topic": {"x": 860, "y": 160, "xpath": "/html/body/aside/button"},
            # A pinned row pushes the topics down one row.
            "topic1": {"y": 240, "xpath": "/html/body/main/table/tbody/tr[2]/td/a"},
            "topic2": {"y": 280, "xpath": "/html/body/main/table/tbody/tr[3]/td/a"},
            "topic3": {"y": 320, "xpath": "/html/body/main/table/tbody/tr[4]/td/a"},
        },
        "insert": [(8, pinned)],
    })
    pairs = [
        ("forum-01", "new_topic", "moved_element"),
        ("forum-02", "topic2", "row_shift"),
        ("forum-03", "avatar", "image_alt"),
        ("forum-04", "search", "von_search"),
        ("forum-05", "foot_faq", "footer_link"),
    ]
    return old, new, pairs


APPS = {"shop": app_shop, "news": app_news, "bank": app_bank, "forum": app_forum}
EXPECTED_FAILURES = {"shop-03", "news-02", "bank-01"}


def node_json(node):
    out = {"document_index": node["document_index"]}
    for key in STRING_KEYS:
        if node.get(key):
            out[key] = node[key]
    out["location"] = f'{node["x"]},{node["y"]}'
    out["width"] = node["w"]
    out["height"] = node["h"]
    return json.dumps(out, ensure_ascii=False, separators=(",", ":"))


def target_nodes(old, key):
    """The target node plus everything that overlaps it on the old page."""
    node = by_key(old, key)
    return [n for n in old if n is node or related(n, node)]


def check(app, old, new, pairs, report):
    elements = merge(new)
    ok = True
    for pair_id, key, _ in pairs:
        desired = merge(target_nodes(old, key))
        anchor = by_key(old, key)["xpath"]
        desired = next(e for e in desired if anchor in e["xpaths"])
        oracle = by_key(new, key)["xpath"]
        ranked = sorted(elements, key=lambda e: (-score(desired["values"], e["values"]),
                                                 e["widget_id"]))
        rank = next(i for i, e in enumerate(ranked, 1) if oracle in e["xpaths"])
        failed = rank != 1
        report.append((pair_id, rank, failed))
        if failed != (pair_id in EXPECTED_FAILURES) or rank > TOP_K:
            ok = False
    return ok


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..",
                                                      "fixtures", "corpus"))
    parser.add_argument("--check-only", action="store_true")
    args = parser.parse_args()

    report = []
    ok = True
    built = {}
    for app, make in APPS.items():
        old, new, pairs = make()
        ok &= check(app, old, new, pairs, report)
        built[app] = (old, new, pairs)
    for pair_id, rank, failed in report:
        print(f"{pair_id}: oracle rank {rank}{' (phase-1 failure)' if failed else ''}")
    if not ok:
        print("corpus does not match the intended failures", file=sys.stderr)
        return 1
    if args.check_only:
        return 0

    for app, (old, new, pairs) in built.items():
        directory = os.path.join(args.out, app)
        os.makedirs(directory, exist_ok=True)
        with open(os.path.join(directory, "new_snapshot.jsonl"), "w", encoding="utf-8") as f:
            for node in new:
                f.write(node_json(node) + "\n")
        with open(os.path.join(directory, "old_target.jsonl"), "w", encoding="utf-8") as f:
            for pair_id, key, kind in pairs:
                header_line = {"pair_id": pair_id, "oracle_xpath": by_key(new, key)["xpath"],
                               "target_xpath": by_key(old, key)["xpath"]}
                f.write(json.dumps(header_line, separators=(",", ":")) + "\n")
                for node in target_nodes(old, key):
                    f.write(node_json(node) + "\n")
    expected = {
        "pairs": [p for p, _, _ in report],
        "phase1_failures": sorted(EXPECTED_FAILURES),
        "change_patterns": {p: kind for app in built.values() for p, _, kind in app[2]},
    }
    with open(os.path.join(args.out, "expected.json"), "w", encoding="utf-8") as f:
        json.dump(expected, f, indent=2)
        f.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
