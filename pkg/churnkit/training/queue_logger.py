"""
Logging from worker processes: workers put their records on a queue that a listener thread in the parent drains
into the configured handlers.
"""
from logging.handlers import QueueHandler, QueueListener
from multiprocessing.queues import Full, Queue


class QueueLevelListener(QueueListener):
    """
    QueueListener that only offers a record to handlers whose level it passes
    """

    def handle(self, record):
        """
        Offer the record to every handler that accepts its level.
        """
        record = self.prepare(record)
        for handler in self.handlers:
            if record.levelno >= handler.level:
                handler.handle(record)


class WorkerQueueHandler(QueueHandler):
    """
    Queues records from a worker, prefixed with the tag of the job that is running. Records that don't fit
    in the queue after three attempts are dropped.
    """

    def __init__(self, queue: Queue):
        super().__init__(queue)
        self.log_id = None

    def prepare(self, record):
        """
        Format the message and prefix it with the job tag if one is set.
        """
        record = super().prepare(record)

        if self.log_id is not None:
            record.message = '{}: {}'.format(self.log_id, record.message)
            record.msg = record.message

        return record

    def enqueue(self, record):
        """
        Try to enqueue the record three times, then drop it.
        """
        for _ in range(3):
            try:
                self.queue.put_nowait(record)
                return
            except Full:
                pass
