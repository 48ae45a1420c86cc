#include "ipu/services/slots.hpp"

#include <stdexcept>

#include "json.hpp"

namespace ipu::services {

using nlohmann::json;

const char* to_string(SlotStatus s) {
    switch (s) {
        case SlotStatus::Empty: return "Empty";
        case SlotStatus::Trial: return "Trial";
        case SlotStatus::Committed: return "Committed";
        case SlotStatus::Failed: return "Failed";
    }
    return "?";
}

SlotStatus slot_status_from_string(const std::string& s) {
    if (s == "Empty") return SlotStatus::Empty;
    if (s == "Trial") return SlotStatus::Trial;
    if (s == "Committed") return SlotStatus::Committed;
    if (s == "Failed") return SlotStatus::Failed;
    throw std::invalid_argument("unknown slot status: " + s);
}

const char* to_string(BootOutcome o) {
    switch (o) {
        case BootOutcome::BootedCommitted: return "BootedCommitted";
        case BootOutcome::BootedTrial: return "BootedTrial";
        case BootOutcome::CommittedTrial: return "CommittedTrial";
        case BootOutcome::SafeMode: return "SafeMode";
    }
    return "?";
}

std::string BootRecord::to_json_line() const {
    json j;
    j["timestamp_ms"] = timestamp_ms;
    j["slot"] = slot;
    j["outcome"] = to_string(outcome);
    j["detail"] = detail;
    return j.dump();
}

void SlotTable::validate() const {
    if (boot_pointer < 0 || boot_pointer > 3) {
        throw std::invalid_argument("slot table: boot pointer out of range");
    }
    int trials = 0;
    bool any_populated = false;
    for (const auto& s : slots) {
        trials += s.status == SlotStatus::Trial;
        any_populated |= s.status != SlotStatus::Empty;
    }
    if (trials > 1) throw std::invalid_argument("slot table: more than one trial slot");
    if (any_populated && slots[boot_pointer].status == SlotStatus::Empty) {
        throw std::invalid_argument("slot table: boot pointer at an empty slot");
    }
}

int SlotTable::trial_slot() const {
    for (int i = 0; i < 4; ++i) {
        if (slots[i].status == SlotStatus::Trial) return i;
    }
    return -1;
}

std::string SlotTable::to_json() const {
    json j;
    j["boot_pointer"] = boot_pointer;
    j["slots"] = json::array();
    for (const auto& s : slots) {
        j["slots"].push_back({{"bundle_id", s.bundle_id}, {"status", to_string(s.status)}});
    }
    return j.dump(2);
}

SlotTable SlotTable::from_json(const std::string& text) {
    SlotTable t;
    try {
        json j = json::parse(text);
        t.boot_pointer = j.at("boot_pointer").get<int>();
        const auto& arr = j.at("slots");
        if (arr.size() != 4) throw std::invalid_argument("slot table: need exactly 4 slots");
        for (size_t i = 0; i < 4; ++i) {
            t.slots[i].bundle_id = arr[i].at("bundle_id").get<std::string>();
            t.slots[i].status = slot_status_from_string(arr[i].at("status").get<std::string>());
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("slot table JSON: ") + e.what());
    }
    t.validate();
    return t;
}

void slot_install(SlotTable& table, int slot, const std::string& bundle_id) {
    table.validate();
    if (slot < 0 || slot > 3) throw std::invalid_argument("install: slot out of range");
    const int existing = table.trial_slot();
    if (existing >= 0 && existing != slot) {
        throw std::invalid_argument("install: another slot is already in trial");
    }
    table.slots[slot] = Slot{bundle_id, SlotStatus::Trial};
    table.boot_pointer = slot;  // next boot tries the new image
}

namespace {

// First bootable slot at or cyclically after `from`; -1 if none.
int find_bootable(const SlotTable& t, int from) {
    for (int k = 0; k < 4; ++k) {
        const int idx = (from + k) % 4;
        if (t.slots[idx].status == SlotStatus::Committed ||
            t.slots[idx].status == SlotStatus::Trial) {
            return idx;
        }
    }
    return -1;
}

BootResult log_boot(SlotTable& t, BootOutcome outcome, int slot, int64_t now_ms,
                    std::string detail) {
    t.boot_log.push_back(BootRecord{now_ms, slot, outcome, std::move(detail)});
    return BootResult{outcome, slot};
}

}  // namespace

BootResult slot_boot(SlotTable& table, bool watchdog_fired, bool ground_confirm,
                     int64_t now_ms) {
    table.validate();
    const int trial = table.trial_slot();

    if (trial >= 0 && watchdog_fired) {
        // The image under trial proved unstable (even if a confirm raced in):
        // fail it and fall back to a committed image.
        table.slots[trial].status = SlotStatus::Failed;
        for (int k = 1; k <= 4; ++k) {
            const int idx = (trial + k) % 4;
            if (table.slots[idx].status == SlotStatus::Committed) {
                table.boot_pointer = idx;
                return log_boot(table, BootOutcome::BootedCommitted, idx, now_ms,
                                "trial slot " + std::to_string(trial) + " failed by watchdog");
            }
        }
        return log_boot(table, BootOutcome::SafeMode, -1, now_ms,
                        "trial slot " + std::to_string(trial) +
                            " failed by watchdog, no committed slot left");
    }

    if (trial >= 0 && ground_confirm) {
        table.slots[trial].status = SlotStatus::Committed;
        table.boot_pointer = trial;
        return log_boot(table, BootOutcome::CommittedTrial, trial, now_ms,
                        "ground confirmed bundle " + table.slots[trial].bundle_id);
    }

    // Normal startup (a watchdog reboot without a trial image lands here too:
    // the pinned committed image is the known-good state, boot it again).
    const int idx = find_bootable(table, table.boot_pointer);
    if (idx < 0) {
        return log_boot(table, BootOutcome::SafeMode, -1, now_ms, "no bootable slot");
    }
    table.boot_pointer = idx;
    if (table.slots[idx].status == SlotStatus::Trial) {
        return log_boot(table, BootOutcome::BootedTrial, idx, now_ms,
                        "first boot of bundle " + table.slots[idx].bundle_id);
    }
    return log_boot(table, BootOutcome::BootedCommitted, idx, now_ms, "");
}

}  // namespace ipu::services
