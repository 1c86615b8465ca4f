import argparse
from dataclasses import dataclass, field
from typing import Any, Callable, List, Sequence, Tuple


Argument = Tuple[tuple, dict]


def arg(*flags: str, **kwargs: Any) -> Argument:
    """Arguments of one add_argument call, declared next to the handler."""
    return flags, kwargs


@dataclass
class Command:
    name: str
    handler: Callable[..., Any]
    help: str
    arguments: Sequence[Argument]
    dests: List[str] = field(default_factory=list)

    def __call__(self, args: argparse.Namespace, config) -> Any:
        return self.handler(config=config, **{d: getattr(args, d) for d in self.dests})


class CommandRouter:
    """Collects subcommands the way a web router collects endpoints."""

    def __init__(self):
        self.commands: List[Command] = []

    def command(self, name: str, *arguments: Argument, help: str = ""):
        def decorator(fn):
            summary = help or (fn.__doc__ or "").strip().split("\n")[0]
            self.commands.append(Command(name, fn, summary, arguments))
            return fn

        return decorator

    def mount(self, subparsers) -> None:
        for command in self.commands:
            sub = subparsers.add_parser(command.name, help=command.help, description=command.help)
            command.dests = [sub.add_argument(*flags, **kwargs).dest for flags, kwargs in command.arguments]
            sub.set_defaults(command=command)
