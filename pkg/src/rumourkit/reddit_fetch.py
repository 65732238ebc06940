"""Download a live Reddit submission into the corpus JSON shape.

Uses the public `.json` endpoint, no credentials. Comments arrive without
stance annotations, so the converter fills the annotation fields with
`Commenting` placeholders; the resolver overwrites them with model
predictions anyway. Kept out of every test and import path that must work
offline: the CLI gates it behind a flag plus an environment variable.
"""

from __future__ import annotations

import json
import urllib.error
import urllib.request

USER_AGENT = "rumourkit/0.1 (research; conversation-tree export)"
TIMEOUT = 30.0


class FetchError(RuntimeError):
    """Network or payload problem, with enough detail to diagnose."""


def _get_json(url: str):
    req = urllib.request.Request(url, headers={"User-Agent": USER_AGENT})
    try:
        with urllib.request.urlopen(req, timeout=TIMEOUT) as resp:
            body = resp.read()
    except urllib.error.HTTPError as exc:
        raise FetchError(f"HTTP {exc.code} from {url}: {exc.reason}") from exc
    except urllib.error.URLError as exc:
        raise FetchError(f"network error for {url}: {exc.reason}") from exc
    try:
        return json.loads(body)
    except json.JSONDecodeError as exc:
        raise FetchError(f"non-JSON response from {url}: {exc}") from exc


def _user_stub(author: str) -> dict:
    return {
        "id": author or "[deleted]",
        "karma": 0,
        "created": "1970-01-01 00:00:00",
        "gold_status": False,
        "is_employee": False,
        "has_verified_email": False,
    }


def _utc(ts: float) -> str:
    import datetime
    dt = datetime.datetime.fromtimestamp(ts, tz=datetime.timezone.utc)
    return dt.strftime("%Y-%m-%d %H:%M:%S")


def _walk(node: dict, submission_id: str, parent_id: str,
          chain: list[dict], branches: list[list[dict]]) -> None:
    data = node.get("data", {})
    comment = {
        "comment_id": data.get("id", ""),
        "submission_id": submission_id,
        "parent_id": parent_id,
        "text": data.get("body", ""),
        "created": _utc(float(data.get("created_utc", 0.0))),
        "upvotes": int(data.get("ups", 0)),
        "is_submitter": bool(data.get("is_submitter", False)),
        "replies": 0,
        "is_deleted": data.get("body") in ("[deleted]", "[removed]"),
        "SDQC_Submission": "Commenting",
        "SDQC_Parent": "Commenting",
        "user": _user_stub(data.get("author", "")),
    }
    replies = data.get("replies") or {}
    children = [c for c in replies.get("data", {}).get("children", [])
                if c.get("kind") == "t1"]
    comment["replies"] = len(children)
    chain = chain + [comment]
    if not children:
        branches.append(chain)
        return
    for child in children:
        _walk(child, submission_id, comment["comment_id"], chain, branches)


def fetch_submission(submission_id: str) -> dict:
    """Whole conversation tree of one submission, corpus-shaped."""
    url = f"https://www.reddit.com/comments/{submission_id}.json?raw_json=1&limit=500"
    payload = _get_json(url)
    if not isinstance(payload, list) or len(payload) < 2:
        raise FetchError(f"unexpected listing shape from {url}")
    sub_data = payload[0]["data"]["children"][0]["data"]
    branches: list[list[dict]] = []
    for top in payload[1]["data"]["children"]:
        if top.get("kind") == "t1":
            _walk(top, submission_id, submission_id, [], branches)
    return {
        "redditSubmission": {
            "submission_id": submission_id,
            "title": sub_data.get("title", ""),
            "text": sub_data.get("selftext", ""),
            "event": sub_data.get("subreddit", ""),
            "created": _utc(float(sub_data.get("created_utc", 0.0))),
            "upvotes": int(sub_data.get("ups", 0)),
            "num_comments": int(sub_data.get("num_comments", 0)),
            "url": sub_data.get("url", ""),
            "text_url": "",
            "is_video": bool(sub_data.get("is_video", False)),
            "subreddit": sub_data.get("subreddit", ""),
            "IsRumour": False,
            "TruthStatus": None,
            "user": _user_stub(sub_data.get("author", "")),
        },
        "branches": branches,
    }
