"""Remote-controlled power strip emulator.

A hardware-free model of an IR remote-controlled power strip: pulse-level
IR codec, per-outlet relay control unit with macros and a master cut-off,
and a discrete-event household energy simulator that quantifies the standby
("phantom") power the strip eliminates.
"""

from phantomstrip.ircodec import (
    DEFAULT_PARAMS,
    DecodeOutcome,
    Diagnostic,
    DiagnosticReason,
    FrameKind,
    IrFrame,
    Level,
    ProtocolParams,
    PulseTrain,
    StreamDecoder,
    decode_train,
    encode_frame,
    encode_repeat,
)
from phantomstrip.control import (
    Action,
    ButtonMap,
    CommandEvent,
    ControlUnit,
    MacroTable,
    MasterToggle,
    NoOp,
    OutletTransition,
    RunMacro,
    StripState,
    ToggleOutlet,
    UnknownMacroError,
    apply_action,
    apply_command,
    default_button_map,
    program_macro,
)
from phantomstrip.relay import (
    ContactTerminal,
    DEFAULT_WIRING,
    RelayState,
    WiringPlan,
    contact_closed,
    outlet_powered,
)
from phantomstrip.sim import (
    ApplianceIntent,
    ApplianceProfile,
    EnergyLedger,
    EnergyReport,
    PowerMode,
    RemotePress,
    ScheduleEvent,
    SimConfig,
    StandbyRangeWarning,
    ZeroTotalError,
    effective_draw,
    integrate_interval,
    run_scenario,
    savings_vs_baseline,
    standby_share,
)

__version__ = "0.1.0"
