#pragma once

#include <stdexcept>
#include <string>

namespace autoct {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An action could not be applied to the active plan set.
class ProposalError : public Error {
public:
    using Error::Error;
};

class DuplicateFeature : public ProposalError {
public:
    explicit DuplicateFeature(const std::string& name)
        : ProposalError("feature already exists: " + name) {}
};

class UnknownFeature : public ProposalError {
public:
    explicit UnknownFeature(const std::string& name)
        : ProposalError("no such feature: " + name) {}
};

class PlanParseError : public Error {
public:
    using Error::Error;
};

class DatasetError : public Error {
public:
    using Error::Error;
};

}  // namespace autoct
