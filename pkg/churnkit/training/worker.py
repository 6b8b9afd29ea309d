"""
Running independent training jobs, inline or on a pool of worker processes. Every job owns its random state, so the
outcome of a job doesn't depend on where or when it runs. Outcomes are returned in job order.
"""
import logging
import multiprocessing
import re
import signal
from multiprocessing import Queue, current_process

from churnkit.element import Element
from churnkit.training.queue_logger import QueueLevelListener, WorkerQueueHandler

from typing import List, Optional, Sequence

logger = logging.getLogger(__name__)

# Set by setup_worker() in worker processes
logging_handler = None
""":type: WorkerQueueHandler"""


class Job(Element):
    """
    Base class for a unit of work. Subclasses are picklable value objects that implement :meth:`run`.
    """

    @property
    def tag(self) -> str:
        """
        A short description used to prefix log messages, like ``alpha=0.3 pair=2``
        """
        return type(self).__name__

    def run(self):
        """
        Do the work.

        :return: The result of the job
        """
        raise NotImplementedError


class JobOutcome(Element):
    """
    What a job returned, or the error it failed with.
    """

    def __init__(self, tag: str, result: object = None, error: Optional[str] = None):
        self.tag = tag
        self.result = result
        self.error = error

    @property
    def failed(self) -> bool:
        """
        Whether the job raised an exception
        """
        return self.error is not None


def setup_worker(logging_queue: Queue):
    """
    Called in every new worker process. Sends all log records to the queue that the parent process drains.

    :param logging_queue: The queue where we can deposit log messages so the main process can log them
    """
    # Shorten the process name to the "ForkPoolWorker-x" bit at the end
    this_process = current_process()
    this_process.name = re.sub(r'^.*?(\w*Worker-\d+)$', r'\1', this_process.name)

    # The parent decides when to stop
    signal.signal(signal.SIGINT, signal.SIG_IGN)

    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    root.setLevel(logging.NOTSET)

    global logging_handler
    logging_handler = WorkerQueueHandler(logging_queue)
    root.addHandler(logging_handler)


def execute_job(job: Job) -> JobOutcome:
    """
    Run a single job and catch whatever it raises.

    :param job: The job to run
    :return: The outcome
    """
    if logging_handler:
        logging_handler.log_id = job.tag

    phase = 'starting'
    try:
        logger.debug("Starting job {}".format(job.tag))
        phase = 'running'
        result = job.run()
        return JobOutcome(job.tag, result)

    except Exception as e:
        logger.error("Job {} failed while {}: {}".format(job.tag, phase, e))
        return JobOutcome(job.tag, error=str(e))

    finally:
        if logging_handler:
            logging_handler.log_id = None


def run_jobs(jobs: Sequence[Job], workers: int = 1) -> List[JobOutcome]:
    """
    Run all jobs and collect their outcomes in job order. With more than one worker the jobs are distributed over a
    process pool whose log records are forwarded to the handlers of the root logger.

    :param jobs: The jobs to run
    :param workers: The number of worker processes, 1 runs everything in this process
    :return: One outcome per job
    """
    jobs = list(jobs)
    if workers < 1:
        raise ValueError("Need at least one worker")

    if workers == 1 or len(jobs) <= 1:
        return [execute_job(job) for job in jobs]

    logging_queue = multiprocessing.Queue()
    listener = QueueLevelListener(logging_queue, *logging.getLogger().handlers)
    listener.start()
    try:
        with multiprocessing.Pool(processes=min(workers, len(jobs)),
                                  initializer=setup_worker, initargs=(logging_queue,)) as pool:
            outcomes = pool.map(execute_job, jobs, chunksize=1)
            pool.close()
            pool.join()
    finally:
        listener.stop()

    return outcomes
