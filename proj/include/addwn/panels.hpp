#pragma once

#include <string>
#include <vector>

#include "addwn/diagnostics.hpp"

namespace addwn {

// Built-in test functions and design models.  Every function id yields an
// additive function with `d` components whose declared Hoelder class is
// honest (the certificate and the class ceiling both hold); every model id
// yields a design whose declared density floor rho is exact.  Suites that
// report maxima over these panels are reporting panel maxima, not suprema
// over the whole smoothness ball.
std::vector<std::string> function_panel_ids();
AdditiveFunction panel_function(const std::string& id, int d);

// Ids admissible at dimension d (coupled designs need d >= 2).
std::vector<std::string> model_panel_ids(int d);
DesignModel panel_model(const std::string& id, int d);

// Fixed scenario panel for the localization-defect bound checks.
std::vector<Scenario> standard_panel();

// Single-coordinate schedule with fine resolution K ~ n^gamma (gamma inside
// the feasible window) and coarse resolution J chosen by optimal_J; used to
// demonstrate that K* times the pilot risk decreases along feasible
// schedules.
std::vector<Scenario> feasible_gamma_schedule(double gamma, const std::vector<int>& ns,
                                              double sigma);

}  // namespace addwn
