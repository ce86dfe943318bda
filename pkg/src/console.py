import click

RULE = "-" * 60
BANNER = "=" * 60

_quiet = False


def set_quiet(flag):
    global _quiet
    _quiet = bool(flag)


def say(message=""):
    """Progress output goes to stderr so stdout stays machine-readable"""
    if not _quiet:
        click.echo(message, err=True)


def banner(title):
    say(BANNER)
    say(title)
    say(BANNER)


def section(title):
    say(f"\n{title}")
    say(RULE)


def bullet(message):
    say(f"   • {message}")


def ok(message):
    say(f"   ✅ {message}")


def warn(message):
    say(f"   ⚠️  {message}")


def fail(message):
    # failures are always shown, even in quiet mode
    click.echo(f"❌ {message}", err=True)
