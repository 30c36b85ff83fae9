/*
 * Copyright (C) 2026 The reinfect authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace reinfect {

/// Error categories. Each maps to a distinct process exit code in the CLI.
enum class ErrorCategory {
    ModelMismatch = 10,
    Instability = 11,
    Input = 12,
    Schema = 13,
    Parse = 14,
    Validation = 15,
    Config = 16,
    Initialization = 17,
    UndefinedStatistic = 18,
    DegenerateSample = 19,
    GridAlignment = 20,
    EvidenceUnderflow = 21,
    OutOfRange = 22,
    Io = 23,
};

inline const char* category_name(ErrorCategory c)
{
    switch (c) {
    case ErrorCategory::ModelMismatch: return "model-mismatch";
    case ErrorCategory::Instability: return "instability";
    case ErrorCategory::Input: return "input";
    case ErrorCategory::Schema: return "schema";
    case ErrorCategory::Parse: return "parse";
    case ErrorCategory::Validation: return "validation";
    case ErrorCategory::Config: return "config";
    case ErrorCategory::Initialization: return "initialization";
    case ErrorCategory::UndefinedStatistic: return "undefined-statistic";
    case ErrorCategory::DegenerateSample: return "degenerate-sample";
    case ErrorCategory::GridAlignment: return "grid-alignment";
    case ErrorCategory::EvidenceUnderflow: return "evidence-underflow";
    case ErrorCategory::OutOfRange: return "out-of-range";
    case ErrorCategory::Io: return "io";
    }
    return "unknown";
}

class Error : public std::runtime_error
{
public:
    Error(ErrorCategory category, const std::string& detail)
        : std::runtime_error(detail)
        , category_(category)
    {
    }

    ErrorCategory category() const noexcept
    {
        return category_;
    }

private:
    ErrorCategory category_;
};

/// Raised when the integrated state leaves the tolerated region.
class InstabilityError : public Error
{
public:
    InstabilityError(double day, std::string compartment, double value)
        : Error(ErrorCategory::Instability, "compartment " + compartment + " reached " + std::to_string(value) +
                                                " on day " + std::to_string(day))
        , day_(day)
        , compartment_(std::move(compartment))
    {
    }

    double day() const noexcept
    {
        return day_;
    }
    const std::string& compartment() const noexcept
    {
        return compartment_;
    }

private:
    double day_;
    std::string compartment_;
};

class EvidenceUnderflowError : public Error
{
public:
    EvidenceUnderflowError(std::size_t n_draws, std::size_t n_failed)
        : Error(ErrorCategory::EvidenceUnderflow,
                "all " + std::to_string(n_draws) + " prior draws have zero likelihood (" + std::to_string(n_failed) +
                    " failed to integrate)")
        , n_draws_(n_draws)
        , n_failed_(n_failed)
    {
    }

    std::size_t n_draws() const noexcept
    {
        return n_draws_;
    }
    std::size_t n_failed() const noexcept
    {
        return n_failed_;
    }

private:
    std::size_t n_draws_;
    std::size_t n_failed_;
};

} // namespace reinfect
