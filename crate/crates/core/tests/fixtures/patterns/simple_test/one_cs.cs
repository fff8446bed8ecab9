using NUnit.Framework;

public class OneCs
{
    [Test]
    public void RoundTrips()
    {
        Assert.AreEqual("x", Echo("x"));
    }
}
