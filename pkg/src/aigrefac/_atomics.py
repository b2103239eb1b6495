"""Atomic read-modify-write primitives on int64 numpy arrays.

numba has no portable atomics for CPU targets, so these are emitted directly
as LLVM ``atomicrmw``/``cmpxchg`` instructions.  They are valid only inside
``njit`` code and only on 1-d int64 arrays.  All engine-side shared counters
(reference counts, lock words, allocation cursors) live in such arrays.
"""

from numba import njit, types
from numba.core import cgutils
from numba.extending import intrinsic


def _item_pointer(context, builder, arrty, args):
    ary = cgutils.create_struct_proxy(arrty)(context, builder, args[0])
    return cgutils.get_item_pointer(context, builder, arrty, ary, (args[1],))


@intrinsic
def atomic_add(typingctx, arr, idx, val):
    """Atomically add ``val`` to ``arr[idx]``; returns the previous value."""
    sig = types.int64(arr, idx, val)

    def codegen(context, builder, signature, args):
        ptr = _item_pointer(context, builder, signature.args[0], args)
        return builder.atomic_rmw("add", ptr, args[2], "monotonic")

    return sig, codegen


@intrinsic
def atomic_cas(typingctx, arr, idx, expected, desired):
    """Atomic compare-and-swap on ``arr[idx]``; returns the previous value."""
    sig = types.int64(arr, idx, expected, desired)

    def codegen(context, builder, signature, args):
        ptr = _item_pointer(context, builder, signature.args[0], args)
        pair = builder.cmpxchg(ptr, args[2], args[3], "acq_rel", "monotonic")
        return builder.extract_value(pair, 0)

    return sig, codegen


@intrinsic
def atomic_xchg(typingctx, arr, idx, val):
    """Atomically store ``val`` into ``arr[idx]``; returns the previous value."""
    sig = types.int64(arr, idx, val)

    def codegen(context, builder, signature, args):
        ptr = _item_pointer(context, builder, signature.args[0], args)
        return builder.atomic_rmw("xchg", ptr, args[2], "acq_rel")

    return sig, codegen


@njit(cache=True, nogil=True)
def lock_acquire(locks, i):
    # Test-and-test-and-set spinlock; uncontended cost is a single CAS.
    while True:
        if locks[i] == 0 and atomic_cas(locks, i, 0, 1) == 0:
            return


@njit(cache=True, nogil=True)
def lock_release(locks, i):
    atomic_xchg(locks, i, 0)
