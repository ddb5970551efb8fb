from .embedder import cosine, hash_embed
from .gateway import ModelConfig, ModelGateway, ModelOutput, complete, embed, first_document
from .scripted import ScriptedBackend, ScriptedFault, ScriptStep, load_script

__all__ = [
    "cosine",
    "hash_embed",
    "ModelConfig",
    "ModelGateway",
    "ModelOutput",
    "complete",
    "embed",
    "first_document",
    "ScriptedBackend",
    "ScriptedFault",
    "ScriptStep",
    "load_script",
]
