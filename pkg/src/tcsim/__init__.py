"""Bit-exact model of mixed-precision block-FMA dot products as implemented
by three GPU tensor-core generations, plus a discriminating-input search
engine, an SMT-LIB query emitter, and two FP32-recovery schemes built on the
model."""

__version__ = "0.1.0"
