#pragma once

#include <string>

#include "mirtlink/simulation.hpp"

namespace mirtlink {

// Full-fidelity StudyReport serialization.  Key order and number formatting
// are deterministic, so identical reports serialize to identical bytes.
std::string study_report_to_json(const StudyReport& report);
StudyReport study_report_from_json(const std::string& text);

// Reproducibility manifest: schema/config digest plus every derived seed.
std::string study_manifest(const StudyReport& report);

}  // namespace mirtlink
