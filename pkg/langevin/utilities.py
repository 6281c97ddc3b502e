import datetime
import hashlib
import os
import tempfile
from contextlib import contextmanager

from langevin import constants


def atomic_write(path, text):
    """Write text to a file atomically.

    The text goes to a temporary file in the same directory, which then
    replaces the destination, so readers never see a partial file.

    Parameters
    ----------
    path : str
        The destination path.
    text : str
        The file contents.

    Returns
    -------
    None

    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)

    descriptor, temporary_path = tempfile.mkstemp(
        dir=directory,
        prefix=".{}.".format(os.path.basename(path)),
        suffix=".tmp",
    )
    try:
        with os.fdopen(descriptor, "w", newline="") as temporary_file:
            temporary_file.write(text)
        os.replace(temporary_path, path)
    except BaseException:
        if os.path.exists(temporary_path):
            os.remove(temporary_path)
        raise


def clear_line():
    """Clear the current line in the terminal.

    Returns
    -------
    None

    """
    print("\033[K", end="")


def ensure_directory(path):
    """Create a directory and its parents if missing, and return its path."""
    os.makedirs(path, exist_ok=True)
    return path


def fingerprint(data):
    """Return the SHA-256 hex digest of bytes or of a file's contents.

    Parameters
    ----------
    data : bytes or str
        Raw bytes, or the path of a file.

    Returns
    -------
    str
        The hex digest.

    """
    digest = hashlib.sha256()
    if isinstance(data, bytes):
        digest.update(data)
        return digest.hexdigest()

    with open(data, "rb") as source:
        for block in iter(lambda: source.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


@contextmanager
def hide_cursor():
    """Hide the cursor and then finally show it again.

    Used as a decorator to hide the cursor when a function starts and
    show the cursor again when the function finishes or an exception occurs.

    Yields
    ------
    None

    """
    # Hide the cursor.
    print("\033[?25l", end="")
    try:
        yield
    finally:
        # Show the cursor.
        print("\033[?25h", end="")


def print_header(header):
    """Print an underlined header.

    Parameters
    ----------
    header : str
        The header text.

    Returns
    -------
    None

    """
    print(header)
    print("-" * len(header))


def print_progress_bar(start_time, step, total, every=100):
    """Redraw the progress bar of a run of total steps.

    The bar is drawn on every multiple of every and on the last step. Once
    two seconds have passed it also shows the step rate and the time left.

    Parameters
    ----------
    start_time : datetime
        When the run began.
    step : int
        The number of steps completed.
    total : int
        The number of steps in the run.
    every : int, optional
        The redraw interval in steps. The default is 100.

    Returns
    -------
    None

    """
    if step < total and step % every:
        return
    clear_line()
    print(_progress_text(start_time, step, total), end="\r")


def _progress_text(start_time, step, total):
    """Build the progress bar, with the percentage and rate while running."""
    width = constants.TABLE_WIDTH
    done = width if step >= total else width * step // total
    text = "█" * done + "░" * (width - done)
    if step >= total:
        return text

    # Truncated, so 100.0% never shows before the end.
    tenths = 1000 * step // total
    text += "  {}.{}%".format(tenths // 10, tenths % 10)

    elapsed = (datetime.datetime.now() - start_time).total_seconds()
    if elapsed > 2 and step > 0:
        rate = step / elapsed
        text += "  |  {:,.0f} steps/s  |  {} to go".format(
            rate,
            _readable_duration((total - step) / rate),
        )
    return text


def _readable_duration(duration):
    """Format a duration in seconds as hours, minutes and seconds."""
    minutes, seconds = divmod(round(duration), 60)
    hours, minutes = divmod(minutes, 60)
    if hours:
        return "{:,}h {:02d}m {:02d}s".format(hours, minutes, seconds)
    if minutes:
        return "{}m {:02d}s".format(minutes, seconds)
    return "{}s".format(seconds)
