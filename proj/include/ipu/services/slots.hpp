#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace ipu::services {

enum class SlotStatus : uint8_t { Empty, Trial, Committed, Failed };

const char* to_string(SlotStatus s);
SlotStatus slot_status_from_string(const std::string& s);  // throws on unknown

struct Slot {
    std::string bundle_id;
    SlotStatus status = SlotStatus::Empty;
};

enum class BootOutcome : uint8_t {
    BootedCommitted,  // normal boot of a committed image
    BootedTrial,      // first boot of a freshly installed image
    CommittedTrial,   // ground confirm promoted the trial, then booted it
    SafeMode,         // nothing bootable: minimal services only
};

const char* to_string(BootOutcome o);

struct BootRecord {
    int64_t timestamp_ms = 0;
    int slot = -1;  // -1 for SafeMode
    BootOutcome outcome = BootOutcome::SafeMode;
    std::string detail;

    std::string to_json_line() const;
};

struct BootResult {
    BootOutcome outcome = BootOutcome::SafeMode;
    int slot = -1;
};

// Four software slots with trial/commit semantics: a new upload boots once as
// Trial; ground confirmation commits it, a watchdog expiry fails it and falls
// back to the last committed image.
struct SlotTable {
    std::array<Slot, 4> slots;
    int boot_pointer = 0;
    std::vector<BootRecord> boot_log;

    // Throws std::invalid_argument: pointer range, more than one Trial.
    void validate() const;

    int trial_slot() const;  // -1 if none

    std::string to_json() const;  // excludes boot_log (kept as its own file)
    static SlotTable from_json(const std::string& text);
};

// Marks `slot` as a Trial of `bundle_id` and points the next boot at it.
// Throws std::invalid_argument if another slot is already in Trial or the
// index is out of range.
void slot_install(SlotTable& table, int slot, const std::string& bundle_id);

// One boot decision. Watchdog wins over confirm when both are set (the
// confirmation refers to an image that just proved unstable).
//   - Trial + watchdog_fired: fail it, fall back to the next committed slot.
//   - Trial + ground_confirm: commit it, pin the pointer, boot it.
//   - watchdog with no trial: reboot the pinned committed image (it is the
//     known-good state; a crash loop must not walk away from it).
//   - otherwise: boot the first bootable slot at or cyclically after the
//     pointer (Trial or Committed); none -> SafeMode.
// Every decision appends to boot_log.
BootResult slot_boot(SlotTable& table, bool watchdog_fired, bool ground_confirm,
                     int64_t now_ms);

}  // namespace ipu::services
