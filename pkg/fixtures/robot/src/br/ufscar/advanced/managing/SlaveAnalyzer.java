package br.ufscar.advanced.managing;

public class SlaveAnalyzer {
    private ProximityReference expectedProximity;

    public boolean needsAdaptation(double reading) {
        double lower = expectedProximity.lowerBound();
        double upper = expectedProximity.upperBound();
        return reading < lower || reading > upper;
    }
}
