// Copyright 2026 The fairimp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FAIRIMP_ERRORS_HPP_
#define FAIRIMP_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace fairimp {

// Broad failure classes. The CLI maps these onto its exit codes.
enum class ErrorCategory { kConfig, kData, kCompute };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

#define FAIRIMP_DEFINE_ERROR(Name, Category)                      \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& what)                        \
        : Error(ErrorCategory::Category, #Name ": " + what) {}    \
  }

// Invalid user-supplied parameters (counts, fractions, seeds, flags).
FAIRIMP_DEFINE_ERROR(ParameterError, kConfig);
// ModelSpec / learner-task incompatibilities.
FAIRIMP_DEFINE_ERROR(SpecError, kConfig);
// Metric / task incompatibilities.
FAIRIMP_DEFINE_ERROR(MetricError, kConfig);
// Feature index out of range, or a drop that would leave no columns.
FAIRIMP_DEFINE_ERROR(IndexError, kConfig);
// Matrix / vector shape disagreement.
FAIRIMP_DEFINE_ERROR(ShapeError, kData);
// Schema does not match the file, or a cell cannot be parsed.
FAIRIMP_DEFINE_ERROR(SchemaError, kData);
// Fewer than two groups where two are required.
FAIRIMP_DEFINE_ERROR(GroupError, kData);
// Train/test partition could not satisfy its group constraint.
FAIRIMP_DEFINE_ERROR(SplitError, kData);
// I/O failures.
FAIRIMP_DEFINE_ERROR(IoError, kData);
// Minipatch ensemble retained no patches.
FAIRIMP_DEFINE_ERROR(EnsembleError, kCompute);
// b_{-j} has an empty denominator: every retained patch contains j.
FAIRIMP_DEFINE_ERROR(UndefinedScoreError, kCompute);

#undef FAIRIMP_DEFINE_ERROR

}  // namespace fairimp

#endif  // FAIRIMP_ERRORS_HPP_
