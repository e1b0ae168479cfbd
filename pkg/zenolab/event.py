"""
Minimal event objects used to report progress of long running
computations (e.g. finished sweep cells) to interested handlers.
"""


class Event(object):
    """
    A named list of handlers that are called in order when the
    event is fired.

    >>> done = Event("cell")
    >>> done += print
    >>> done("tau=1.0 finished")
    tau=1.0 finished
    """
    def __init__(self, name):
        self.handlers = []
        self.name = name

    def add_handler(self, handler):
        if handler not in self.handlers:
            self.handlers.append(handler)
        return self

    def fire(self, *args, **kwargs):
        for handler in self.handlers:
            handler(*args, **kwargs)

    def __len__(self):
        return len(self.handlers)

    def __repr__(self):
        return "<%sEvent>" % self.name

    __iadd__ = add_handler
    __call__ = fire


class CellProgress(object):
    """
    Context handed to the handlers of a sweep progress event.

    * index: position of the finished cell in the sweep grid
    * total: number of cells
    * tau: Zeno interval of the cell
    * error: error message if the cell failed, else None
    """
    def __init__(self, index, total, tau, error=None):
        self.index = index
        self.total = total
        self.tau = tau
        self.error = error

    @property
    def failed(self):
        return self.error is not None

    def __repr__(self):
        state = "failed" if self.failed else "done"
        return "<CellProgress %d/%d tau=%g %s>" % (self.index + 1, self.total,
                                                   self.tau, state)
