package br.ufscar.advanced.managing;

import br.ufscar.advanced.adapters.BluetoothAdapter;

public class SlaveMonitor {
    private BluetoothAdapter proximitySensor;
    private Knowledge knowledge;

    public void sense() {
        double reading = proximitySensor.readDistance();
        knowledge.store(reading);
    }
}
