"""HTTP service for listening tests.

Endpoints:
  GET  /session/<id>    blinded session descriptor
  GET  /audio/<stim>    WAV bytes for one stimulus
  POST /ratings         one record per (listener, trial); appended to JSONL
  GET  /report          per-system aggregate over the ratings store

The ratings store is append-only JSON-lines guarded by a lock; duplicate
(listener, trial) submissions are rejected with 409 and nothing is written.
Responses carry permissive CORS headers so a browser client served from
another origin can talk to the service.
"""

import json
import os
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import unquote

from .mushra import ROLE_SYSTEM
from .report import aggregate_scores


class MushraService:
    """State shared by all request handlers for one served session."""

    def __init__(self, session, audit, ratings_path):
        self.session = session
        self.audit = audit
        self.ratings_path = ratings_path
        self.lock = threading.Lock()
        self.trial_labels = {
            t["id"]: {s["label"] for s in t["stimuli"]} for t in session["trials"]}
        self.seen = set()
        if os.path.exists(ratings_path):
            with open(ratings_path) as fh:
                for line in fh:
                    record = json.loads(line)
                    self.seen.add((record["listener"], record["trial"]))

    # ------------------------------------------------------------- queries
    def session_json(self, session_id):
        if session_id != self.session["session_id"]:
            return None
        return self.session

    def audio_path(self, stimulus_id):
        entry = self.audit["stimuli"].get(stimulus_id)
        return entry["path"] if entry else None

    def report(self):
        records = []
        if os.path.exists(self.ratings_path):
            with open(self.ratings_path) as fh:
                for line in fh:
                    records.append(self._unblind(json.loads(line)))
        if not records:
            return {"n_records": 0, "systems": {}}
        return {"n_records": len(records), "systems": aggregate_scores(records)}

    def _unblind(self, record):
        scores = {}
        for label, value in record["scores"].items():
            entry = self.audit["stimuli"][f"{record['trial']}:{label}"]
            key = entry["system"] if entry["role"] == ROLE_SYSTEM else entry["role"]
            scores[key] = value
        return {"listener": record["listener"], "trial": record["trial"],
                "scores": scores}

    # ------------------------------------------------------------ mutation
    def submit(self, payload):
        """Validate and persist one rating record.

        Returns (status, body). Persists nothing unless the status is 200.
        """
        if not isinstance(payload, dict):
            return 400, {"error": "body must be a JSON object"}
        listener = payload.get("listener")
        trial = payload.get("trial")
        scores = payload.get("scores")
        if not isinstance(listener, str) or not listener:
            return 400, {"error": "listener must be a non-empty string"}
        if not isinstance(trial, str):
            return 400, {"error": "trial must be a string"}
        if trial not in self.trial_labels:
            return 404, {"error": f"unknown trial {trial!r}"}
        if not isinstance(scores, dict):
            return 400, {"error": "scores must be an object"}
        expected = self.trial_labels[trial]
        if set(scores) != expected:
            return 400, {"error": f"scores must cover labels {sorted(expected)}"}
        for label, value in scores.items():
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                return 400, {"error": f"score for {label} must be a number"}
            if not 0 <= value <= 100:
                return 400, {"error": f"score for {label} out of [0, 100]: {value}"}
        record = {"listener": listener, "trial": trial, "scores": scores}
        if "timestamp" in payload:   # client-supplied; never generated here
            record["timestamp"] = payload["timestamp"]
        with self.lock:
            if (listener, trial) in self.seen:
                return 409, {"error": f"duplicate rating for {listener}/{trial}"}
            with open(self.ratings_path, "a") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
            self.seen.add((listener, trial))
        return 200, {"status": "accepted"}


class _Handler(BaseHTTPRequestHandler):
    service = None   # injected by serve()

    def log_message(self, *args):   # keep test output quiet
        pass

    def _send(self, status, body, content_type="application/json"):
        data = body if isinstance(body, bytes) else json.dumps(body).encode()
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()
        self.wfile.write(data)

    def do_OPTIONS(self):
        self._send(204, b"")

    def do_GET(self):
        path = unquote(self.path.split("?", 1)[0])
        if path.startswith("/session/"):
            session = self.service.session_json(path[len("/session/"):])
            if session is None:
                return self._send(404, {"error": "unknown session"})
            return self._send(200, session)
        if path.startswith("/audio/"):
            wav_path = self.service.audio_path(path[len("/audio/"):])
            if wav_path is None or not os.path.exists(wav_path):
                return self._send(404, {"error": "unknown stimulus"})
            with open(wav_path, "rb") as fh:
                return self._send(200, fh.read(), content_type="audio/wav")
        if path == "/report":
            return self._send(200, self.service.report())
        self._send(404, {"error": "unknown endpoint"})

    def do_POST(self):
        path = unquote(self.path.split("?", 1)[0])
        if path != "/ratings":
            return self._send(404, {"error": "unknown endpoint"})
        length = int(self.headers.get("Content-Length", 0))
        try:
            payload = json.loads(self.rfile.read(length) or b"")
        except json.JSONDecodeError:
            return self._send(400, {"error": "invalid JSON"})
        status, body = self.service.submit(payload)
        self._send(status, body)


def serve(session, audit, ratings_path, port=0, host="127.0.0.1"):
    """Create (not start) the HTTP server; caller runs serve_forever().

    Port 0 binds an ephemeral port; read it back from server.server_address.
    """
    service = MushraService(session, audit, ratings_path)
    handler = type("BoundHandler", (_Handler,), {"service": service})
    server = ThreadingHTTPServer((host, port), handler)
    server.service = service
    return server
