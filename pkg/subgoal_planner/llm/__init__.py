from .gateway import (BackendConfig, ChatRequest, Gateway, Transcript, TranscriptRecord,
                      complete, fingerprint, make_gateway)
from .backends import (HttpBackend, MockBackend, ReplayBackend, make_backend,
                       register_responder, sanitize)
