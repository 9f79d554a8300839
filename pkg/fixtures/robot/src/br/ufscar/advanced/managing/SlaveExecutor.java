package br.ufscar.advanced.managing;

public class SlaveExecutor {
    private double power;

    public void execute(double correction) {
        power = power + correction;
    }
}
