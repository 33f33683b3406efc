from .sampler import Batch, MixtureSampler, VIEWS

__all__ = ["Batch", "MixtureSampler", "VIEWS"]
